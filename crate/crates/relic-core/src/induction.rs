//! k-induction over the composed strongest system-property, with base and
//! inductive obligations discharged as QE validity checks.
//!
//! Base: the composed initial condition plus every property instance fitting
//! the first steps must force the postulate there. Inductive: the property
//! instances over a k+1-step window plus the postulate at the first k steps
//! must force it at the next. Only base-step failures produce
//! counterexamples; inductive-step counterexamples may start from an
//! unreachable window and are never reported as system traces.
//!
//! Implication postulates whose antecedent is time-dependent get the
//! historical reading: the guard is assumed to have held at every step up to
//! the one under proof. When the guard's step-0 instance is an anchor fact
//! that the guard itself propagates (checked by QE), the induction
//! hypothesis carries that fact along, which is what closes feedback
//! benchmarks at k = 1.

use std::collections::BTreeMap;

use crate::compose::{self, CompositionResult, StaticVerdict};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, Sort, TimeIndex, TimedVar};
use crate::model::{Postulate, SystemModel};
use crate::qe_int;
use crate::qe_real::{self, Witness};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownReason {
    /// k reached the configured bound without a proof
    Budget,
    Unsupported(String),
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Valid {
        at_k: u32,
    },
    Invalid {
        trace: Vec<Assignment>,
        symbolic: Option<Witness>,
    },
    Unknown {
        reason: UnknownReason,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid { .. })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InductionConfig {
    pub k_max: u32,
    pub parallel: bool,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            k_max: 10,
            parallel: false,
        }
    }
}

/// How the postulate participates in the obligations.
enum Mode {
    /// assert the postulate instance as a whole
    Plain,
    /// implication with a historically-read guard; `anchor` is the guard's
    /// step-0 fact, re-read relatively, that the guard propagates forward
    Chain { anchor: Option<Formula> },
}

fn postl_mode(postl: &Postulate) -> Result<Mode> {
    let Some((guard, _body)) = &postl.split else {
        return Ok(Mode::Plain);
    };
    if guard.order == 0 {
        return Ok(Mode::Plain);
    }
    // anchor fact: the guard's step-0 instance, if the guard keeps it true
    let mut anchor = None;
    if guard.order == 1 {
        if let Some((0, init0)) = guard.inits.first().map(|(s, f)| (*s, f.clone())) {
            let fact = init0.relativize(0)?;
            let sticky = Formula::implies(
                Formula::and([fact.shift(-1)?, guard.rel.clone()]),
                fact.clone(),
            );
            if qe_real::is_valid(&sticky)? {
                anchor = Some(fact);
            }
        }
    }
    Ok(Mode::Chain { anchor })
}

/// Instance of a desugared expression at an absolute step: the init-unrolled
/// form below its order, the relative form above, `None` where inexpressible.
fn instance_at(d: &crate::ast::Desugared, step: u64) -> Result<Option<Formula>> {
    if step < d.order {
        Ok(d.inits
            .iter()
            .find(|(s, _)| *s == step)
            .map(|(_, f)| f.clone()))
    } else {
        Ok(Some(d.rel.instantiate_at(step as i64)?))
    }
}

/// How far past `k` the base case must reach so the inductive step's
/// relative-form hypotheses are available at every later position.
fn base_extension(postl: &Postulate) -> Result<u64> {
    Ok(match (&postl.split, postl_mode(postl)?) {
        (Some((guard, body)), Mode::Chain { .. }) => body.order.max(guard.order.saturating_sub(1)),
        _ => postl.whole.order,
    })
}

/// Closes a quantifier-free implication universally over its free variables.
fn forall_closure(f: Formula) -> Formula {
    let vars = f.free_vars();
    let mut out = f;
    for v in vars {
        out = Formula::forall(v, out);
    }
    out
}

/// The base obligation for depth `k`: initial condition and early property
/// instances force the postulate on the first steps.
pub fn base_obligation(
    init: &Formula,
    ssp: &Formula,
    postl: &Postulate,
    k: u32,
) -> Result<Formula> {
    let d_ssp = ssp.order()?;
    let steps = k as u64 + base_extension(postl)?;
    let mut premise = vec![init.clone()];
    for anchor in d_ssp..steps {
        premise.push(ssp.instantiate_at(anchor as i64)?);
    }

    let mut conclusion = Vec::new();
    match (postl_mode(postl)?, &postl.split) {
        (Mode::Chain { .. }, Some((guard, body))) => {
            let mut chain: Vec<Formula> = Vec::new();
            for i in 0..steps {
                if let Some(g) = instance_at(guard, i)? {
                    chain.push(g);
                }
                if let Some(b) = instance_at(body, i)? {
                    conclusion.push(Formula::implies(Formula::and(chain.clone()), b));
                }
            }
        }
        _ => {
            for i in 0..steps {
                if let Some(p) = instance_at(&postl.whole, i)? {
                    conclusion.push(p);
                }
            }
        }
    }
    Ok(forall_closure(Formula::implies(
        Formula::and(premise),
        Formula::and(conclusion),
    )))
}

/// The inductive obligation for depth `k`, with the window anchored so the
/// step under proof sits at offset 0.
pub fn inductive_obligation(ssp: &Formula, postl: &Postulate, k: u32) -> Result<Formula> {
    let d_ssp = ssp.order()? as i64;
    let k = k as i64;
    let mut premise = Vec::new();
    // property instances whose windows are certainly inside the trace
    let mut a = d_ssp - k;
    while a <= 0 {
        premise.push(ssp.shift(a)?);
        a += 1;
    }

    let conclusion = match (postl_mode(postl)?, &postl.split) {
        (Mode::Chain { anchor }, Some((guard, body))) => {
            for j in -k..=-1 {
                if let Some(fact) = &anchor {
                    premise.push(fact.shift(j)?);
                }
                premise.push(body.rel.shift(j)?);
            }
            for j in (-k + 1)..=0 {
                premise.push(guard.rel.shift(j)?);
            }
            body.rel.clone()
        }
        _ => {
            for j in -k..=-1 {
                premise.push(postl.whole.rel.shift(j)?);
            }
            postl.whole.rel.clone()
        }
    };
    Ok(forall_closure(Formula::implies(
        Formula::and(premise),
        conclusion,
    )))
}

/// Runs k-induction for k = 1..k_max. A failing base case yields `Invalid`
/// with a concretized counterexample trace; a passing base and inductive
/// case yields `Valid(k)`; exhaustion yields `Unknown(budget)`.
pub fn k_induction(
    init: &Formula,
    ssp: &Formula,
    postl: &Postulate,
    domain: Sort,
    cfg: &InductionConfig,
) -> Result<Verdict> {
    for k in 1..=cfg.k_max {
        let base = base_obligation(init, ssp, postl, k)?;
        let step = inductive_obligation(ssp, postl, k)?;
        let (base_ok, step_ok) = if cfg.parallel {
            std::thread::scope(|scope| -> Result<(bool, bool)> {
                let b = scope.spawn(|| qe_real::is_valid(&base));
                let s = scope.spawn(|| qe_real::is_valid(&step));
                Ok((
                    b.join().expect("base checker panicked")?,
                    s.join().expect("step checker panicked")?,
                ))
            })?
        } else {
            let b = qe_real::is_valid(&base)?;
            // the inductive side only matters when the base holds
            let s = b && qe_real::is_valid(&step)?;
            (b, s)
        };
        if !base_ok {
            return base_counterexample(init, ssp, postl, k, domain);
        }
        if step_ok {
            return Ok(Verdict::Valid { at_k: k });
        }
    }
    Ok(Verdict::Unknown {
        reason: UnknownReason::Budget,
    })
}

fn base_counterexample(
    init: &Formula,
    ssp: &Formula,
    postl: &Postulate,
    k: u32,
    domain: Sort,
) -> Result<Verdict> {
    // witness of premise and not conclusion, over the absolute-step variables
    let base = base_obligation(init, ssp, postl, k)?;
    let mut body = &base;
    while let Formula::Forall(_, inner) = body {
        body = &**inner;
    }
    let Formula::Implies(premise, conclusion) = body else {
        return Err(Error::Contract("base obligation shape".into()));
    };
    let ce = Formula::and([(**premise).clone(), Formula::not((**conclusion).clone())]);
    let vars: Vec<TimedVar> = ce.free_vars().into_iter().collect();

    let (symbolic, concrete) = if domain == Sort::Int {
        (None, qe_int::int_witness(&ce, &vars)?)
    } else {
        let w = qe_real::extract_witness(&ce, &vars)?;
        let c = w.as_ref().and_then(|w| qe_real::concretize_witness(w, &ce));
        (w, c)
    };
    let trace = concrete.map(|asg| split_trace(&asg)).unwrap_or_default();
    Ok(Verdict::Invalid { trace, symbolic })
}

/// Reorganizes an absolute-step assignment into one assignment per step,
/// re-keyed at the current-step offset.
fn split_trace(asg: &Assignment) -> Vec<Assignment> {
    let mut steps: BTreeMap<u64, Assignment> = BTreeMap::new();
    let mut max_step = 0;
    for (v, value) in asg.iter() {
        let TimeIndex::Absolute(s) = v.index else {
            continue;
        };
        max_step = max_step.max(s);
        steps
            .entry(s)
            .or_default()
            .set(TimedVar::at_k(v.name.clone(), v.sort), value.clone());
    }
    (0..=max_step)
        .map(|s| steps.remove(&s).unwrap_or_default())
        .collect()
}

/// Full pipeline outcome: the verdict plus the composition artifacts.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub verdict: Verdict,
    pub composition: CompositionResult,
}

/// Composes the system and dispatches verification: static implication check
/// when nothing in sight is time-dependent, k-induction otherwise.
pub fn run_pipeline(
    model: &SystemModel,
    postl: &Postulate,
    cfg: &InductionConfig,
) -> Result<PipelineOutcome> {
    let diags = model.validate();
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(Error::Contract(format!(
            "invalid model: {}",
            text.join("; ")
        )));
    }
    let input = model.composition_input();
    let static_path = model.order_bound() == 0 && postl.is_static() && input.initials.is_empty();

    if static_path {
        let ssp = compose::strongest_property_static(&input)?;
        let verdict = match compose::verify_postulated_static(&ssp, &postl.whole.rel, model.domain)?
        {
            StaticVerdict::Valid => Verdict::Valid { at_k: 1 },
            StaticVerdict::Invalid { witness, concrete } => Verdict::Invalid {
                trace: concrete.map(|a| vec![a]).unwrap_or_default(),
                symbolic: witness,
            },
        };
        let composition = CompositionResult {
            ssp: ssp.clone(),
            raw_ssp: ssp,
            init: Formula::truth(true),
            used_order_bound: 0,
            pruned_order: 0,
        };
        return Ok(PipelineOutcome {
            verdict,
            composition,
        });
    }

    let composition = compose::strongest_property_timed(&input)?;
    let verdict = match k_induction(
        &composition.init,
        &composition.ssp,
        postl,
        model.domain,
        cfg,
    ) {
        Ok(v) => v,
        Err(Error::UnsupportedTheory(what)) => Verdict::Unknown {
            reason: UnknownReason::Unsupported(what),
        },
        Err(e) => return Err(e),
    };
    Ok(PipelineOutcome {
        verdict,
        composition,
    })
}
