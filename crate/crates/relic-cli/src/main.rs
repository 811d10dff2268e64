//! `relic` — compositional verification by quantifier elimination.
//!
//! Subcommands: `compose` (derive the strongest system-property and its
//! initial condition), `verify` (full pipeline with k-induction), `order`
//! (order bookkeeping), `sat` (SMT-LIB satisfiability), `range` (block-graph
//! range propagation). Exit codes: 0 valid/sat/ok, 1 invalid/unsat,
//! 2 unknown, 3 error.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use relic_core::compose;
use relic_core::induction::{run_pipeline, InductionConfig};
use relic_core::model::{Postulate, SystemModel};
use relic_core::rangeprop;
use relic_core::report::{self, Report, SatReport};
use relic_core::smt::{self, SatOutcome};
use relic_core::speclang;
use relic_core::{Sort, Value};

#[derive(Parser)]
#[command(
    name = "relic",
    version,
    about = "compositional verification by quantifier elimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Logic {
    Real,
    Int,
    Mixed,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the strongest system-property and system-initial-condition
    Compose { spec: PathBuf },
    /// Compose, then verify every postulate (k-induction for timed systems)
    Verify {
        spec: PathBuf,
        /// hard stop for the induction depth
        #[arg(long, default_value_t = 10)]
        k_max: u32,
        /// check base and inductive obligations concurrently
        #[arg(long)]
        parallel: bool,
    },
    /// Report the order bound and the pruned system order
    Order { spec: PathBuf },
    /// Decide satisfiability of an SMT-LIB script (`-` reads stdin)
    Sat {
        file: PathBuf,
        /// expected theory; mismatches are an error
        #[arg(long, value_enum)]
        logic: Option<Logic>,
    },
    /// Propagate input ranges through a block graph (.bg) or ReLU net (.net)
    Range {
        graph: PathBuf,
        /// target block
        #[arg(long)]
        output: String,
        /// also run the interval-arithmetic baseline
        #[arg(long)]
        baseline: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            match cli.format {
                Format::Text => print!("{}", report.render_text()),
                Format::Structured => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).expect("serializable")
                    )
                }
            }
            let code = report.exit_code();
            ExitCode::from(code as u8)
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<Report, String> {
    match &cli.command {
        Command::Compose { spec } => compose_cmd(spec),
        Command::Verify {
            spec,
            k_max,
            parallel,
        } => verify_cmd(spec, *k_max, *parallel),
        Command::Order { spec } => order_cmd(spec),
        Command::Sat { file, logic } => sat_cmd(file, *logic),
        Command::Range {
            graph,
            output,
            baseline,
        } => range_cmd(graph, output, *baseline),
    }
}

fn read_input(path: &Path) -> Result<String, String> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn load_model(path: &Path) -> Result<(SystemModel, Vec<Postulate>), String> {
    let text = read_input(path)?;
    let doc = speclang::parse(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    doc.lower().map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        format!("{}: {}", path.display(), lines.join("; "))
    })
}

fn compose_cmd(spec: &Path) -> Result<Report, String> {
    let started = Instant::now();
    let (model, _) = load_model(spec)?;
    let parse_ms = started.elapsed().as_millis();

    let composing = Instant::now();
    let result =
        compose::strongest_property_timed(&model.composition_input()).map_err(|e| e.to_string())?;
    let compose_ms = composing.elapsed().as_millis();

    let mut report = Report::new("compose");
    report.system = Some(model.name.clone());
    report.domain = Some(model.domain.to_string());
    report.order_bound = Some(result.used_order_bound);
    report.pruned_order = Some(result.pruned_order);
    report.ssp = Some(result.ssp.to_string());
    report.init = Some(result.init.to_string());
    report.timing_ms.insert("parse".into(), parse_ms);
    report.timing_ms.insert("compose".into(), compose_ms);
    Ok(report)
}

fn verify_cmd(spec: &Path, k_max: u32, parallel: bool) -> Result<Report, String> {
    let started = Instant::now();
    let (model, postulates) = load_model(spec)?;
    let parse_ms = started.elapsed().as_millis();
    if postulates.is_empty() {
        return Err(format!("{}: no postulate to verify", spec.display()));
    }

    let mut report = Report::new("verify");
    report.system = Some(model.name.clone());
    report.domain = Some(model.domain.to_string());
    report.timing_ms.insert("parse".into(), parse_ms);

    let cfg = InductionConfig { k_max, parallel };
    let verifying = Instant::now();
    for (i, postl) in postulates.iter().enumerate() {
        let outcome = run_pipeline(&model, postl, &cfg).map_err(|e| e.to_string())?;
        report.order_bound = Some(outcome.composition.used_order_bound);
        report.pruned_order = Some(outcome.composition.pruned_order);
        report.ssp = Some(outcome.composition.ssp.to_string());
        report.init = Some(outcome.composition.init.to_string());
        report.verdicts.push(report::verdict_report(
            format!("#{}", i + 1),
            &outcome.verdict,
        ));
    }
    report
        .timing_ms
        .insert("verify".into(), verifying.elapsed().as_millis());
    Ok(report)
}

fn order_cmd(spec: &Path) -> Result<Report, String> {
    let started = Instant::now();
    let (model, _) = load_model(spec)?;
    let result =
        compose::strongest_property_timed(&model.composition_input()).map_err(|e| e.to_string())?;
    let mut report = Report::new("order");
    report.system = Some(model.name.clone());
    report.domain = Some(model.domain.to_string());
    report.order_bound = Some(result.used_order_bound);
    report.pruned_order = Some(result.pruned_order);
    report
        .timing_ms
        .insert("total".into(), started.elapsed().as_millis());
    Ok(report)
}

fn sat_cmd(file: &Path, logic: Option<Logic>) -> Result<Report, String> {
    let started = Instant::now();
    let text = read_input(file)?;
    let problem = smt::parse_smtlib(&text).map_err(|e| format!("{}:{e}", file.display()))?;

    let (has_real, has_int) = problem.sorts_present();
    if let Some(expect) = logic {
        let ok = match expect {
            Logic::Real => !has_int,
            Logic::Int => !has_real,
            Logic::Mixed => true,
        };
        if !ok {
            return Err(format!(
                "{}: declarations do not match --logic {}",
                file.display(),
                match expect {
                    Logic::Real => "real",
                    Logic::Int => "int",
                    Logic::Mixed => "mixed",
                }
            ));
        }
    }

    let outcome = match logic {
        Some(Logic::Mixed) => smt::check_sat_mixed(&problem, &smt::MixedConfig::default()),
        _ => smt::check_sat(&problem),
    }
    .map_err(|e| e.to_string())?;

    let mut report = Report::new("sat");
    report.sat = Some(match outcome {
        SatOutcome::Sat(model) => {
            let rendered = model
                .iter()
                .map(|(v, value)| {
                    let text = match value {
                        Value::Num(r) => format!("{}/{}", r.numer(), r.denom()),
                        Value::Bool(b) => b.to_string(),
                    };
                    (v.name.clone(), text)
                })
                .collect();
            SatReport {
                outcome: "sat".into(),
                reason: None,
                model: problem.wants_model.then_some(rendered),
            }
        }
        SatOutcome::Unsat => SatReport {
            outcome: "unsat".into(),
            reason: None,
            model: None,
        },
        SatOutcome::Unknown(reason) => SatReport {
            outcome: "unknown".into(),
            reason: Some(reason),
            model: None,
        },
    });
    report
        .timing_ms
        .insert("total".into(), started.elapsed().as_millis());
    Ok(report)
}

fn range_cmd(path: &Path, output: &str, baseline: bool) -> Result<Report, String> {
    let started = Instant::now();
    let text = read_input(path)?;
    let graph = if path.extension().is_some_and(|e| e == "net") {
        rangeprop::parse_net(&text)
    } else {
        rangeprop::parse_graph(&text)
    }
    .map_err(|e| format!("{}:{e}", path.display()))?;

    let diags = graph.validate();
    if !diags.is_empty() {
        let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(format!("{}: {}", path.display(), lines.join("; ")));
    }

    let range = rangeprop::output_range(&graph, output).map_err(|e| e.to_string())?;
    let baseline_text = if baseline {
        Some(
            rangeprop::naive_interval_range(&graph, output)
                .map_err(|e| e.to_string())?
                .to_string(),
        )
    } else {
        None
    };

    let mut report = Report::new("range");
    report.system = Some(graph.name.clone());
    report.domain = Some(Sort::Real.to_string());
    report.range = Some(report::range_section(&range, baseline_text));
    report
        .timing_ms
        .insert("total".into(), started.elapsed().as_millis());
    Ok(report)
}
