//! Structured results shared by the command-line front end: one schema that
//! both the human text and the machine format render from, so the machine
//! variant is always a superset of the text.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::formula::{Assignment, Value};
use crate::induction::{UnknownReason, Verdict};
use crate::rangeprop::RangeReport;
use crate::rational::Rational;

pub const SCHEMA: &str = "relic-report/1";

#[derive(Debug, Clone, Serialize, Default)]
pub struct Report {
    pub schema: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruned_order: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub verdicts: Vec<VerdictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sat: Option<SatReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSection>,
    pub timing_ms: BTreeMap<String, u128>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub postulate: String,
    /// `valid`, `invalid`, or `unknown`
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// one map per trace step, exact rationals rendered as text
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<BTreeMap<String, String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic_witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SatReport {
    /// `sat`, `unsat`, or `unknown`
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeSection {
    pub target: String,
    pub formula: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<BoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<BoundJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundJson {
    pub value: String,
    pub strict: bool,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            ..Default::default()
        }
    }

    /// The process exit code is a pure function of the recorded outcomes:
    /// 0 valid/sat/ok, 1 invalid/unsat, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        let mut code = 0;
        for v in &self.verdicts {
            match v.outcome.as_str() {
                "invalid" => return 1,
                "unknown" => code = code.max(2),
                _ => {}
            }
        }
        if let Some(sat) = &self.sat {
            match sat.outcome.as_str() {
                "unsat" => return 1,
                "unknown" => code = code.max(2),
                _ => {}
            }
        }
        code
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut push = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        if let Some(system) = &self.system {
            push(format!(
                "system {system} (domain {})",
                self.domain.as_deref().unwrap_or("?")
            ));
        }
        if let Some(b) = self.order_bound {
            push(format!("order bound: {b}"));
        }
        if let Some(p) = self.pruned_order {
            push(format!("pruned order: {p}"));
        }
        if let Some(ssp) = &self.ssp {
            push(format!("strongest system-property:\n  {ssp}"));
        }
        if let Some(init) = &self.init {
            push(format!("system-initial-condition:\n  {init}"));
        }
        for v in &self.verdicts {
            let mut line = format!("postulate {}: {}", v.postulate, v.outcome);
            if let Some(k) = v.k {
                line.push_str(&format!(" (k = {k})"));
            }
            if let Some(reason) = &v.reason {
                line.push_str(&format!(" ({reason})"));
            }
            push(line);
            if let Some(trace) = &v.counterexample {
                push("counterexample:".to_string());
                for (step, asg) in trace.iter().enumerate() {
                    let cells: Vec<String> =
                        asg.iter().map(|(k, val)| format!("{k} = {val}")).collect();
                    push(format!("  step {step}: {}", cells.join(", ")));
                }
            }
            if let Some(w) = &v.symbolic_witness {
                push(format!("  witness: {w}"));
            }
        }
        if let Some(sat) = &self.sat {
            push(sat.outcome.clone());
            if let Some(reason) = &sat.reason {
                push(format!("  ({reason})"));
            }
            if let Some(model) = &sat.model {
                for (name, value) in model {
                    push(format!("{name} {value}"));
                }
            }
        }
        if let Some(range) = &self.range {
            push(format!("range of {}:", range.target));
            match &range.interval {
                Some(iv) => push(format!("  {iv}")),
                None => push(format!("  {}", range.formula)),
            }
            push(format!("  formula: {}", range.formula));
            if let Some(b) = &range.baseline {
                push(format!("  interval-arithmetic baseline: {b}"));
            }
        }
        let timing: Vec<String> = self
            .timing_ms
            .iter()
            .map(|(k, v)| format!("{k} {v}ms"))
            .collect();
        if !timing.is_empty() {
            push(format!("timing: {}", timing.join(", ")));
        }
        out
    }
}

/// Exact-text rendering of an assignment's values (no floats anywhere).
pub fn assignment_cells(asg: &Assignment) -> BTreeMap<String, String> {
    asg.iter()
        .map(|(v, value)| {
            let text = match value {
                Value::Num(r) => render_exact(r),
                Value::Bool(b) => b.to_string(),
            };
            (v.to_string(), text)
        })
        .collect()
}

pub fn render_exact(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn verdict_report(postulate: String, verdict: &Verdict) -> VerdictReport {
    match verdict {
        Verdict::Valid { at_k } => VerdictReport {
            postulate,
            outcome: "valid".into(),
            k: Some(*at_k),
            reason: None,
            counterexample: None,
            symbolic_witness: None,
        },
        Verdict::Invalid { trace, symbolic } => VerdictReport {
            postulate,
            outcome: "invalid".into(),
            k: None,
            reason: None,
            counterexample: Some(trace.iter().map(assignment_cells).collect()),
            symbolic_witness: symbolic.as_ref().map(|w| w.to_string()),
        },
        Verdict::Unknown { reason } => VerdictReport {
            postulate,
            outcome: "unknown".into(),
            k: None,
            reason: Some(match reason {
                UnknownReason::Budget => "k bound exhausted".into(),
                UnknownReason::Unsupported(what) => format!("unsupported: {what}"),
            }),
            counterexample: None,
            symbolic_witness: None,
        },
    }
}

pub fn range_section(report: &RangeReport, baseline: Option<String>) -> RangeSection {
    let bound = |b: &crate::rangeprop::RangeBound| BoundJson {
        value: render_exact(&b.value),
        strict: b.strict,
    };
    let interval = match (&report.lower, &report.upper) {
        (Some(_), Some(_)) => Some(report.to_string()),
        _ => None,
    };
    RangeSection {
        target: report.target.clone(),
        formula: report.formula.to_string(),
        lower: report.lower.as_ref().map(bound),
        upper: report.upper.as_ref().map(bound),
        interval,
        baseline,
    }
}
