mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qss_core::adversary::AttackReport;
use qss_core::analysis::{
    self, efficiency, leakage, qber_summary, resources, Accounting, ComparisonRow, Conditioning,
    Observable, QberSummary, ResourceLedger,
};
use qss_core::protocol::{run, Transcript};
use serde::Serialize;

use output::Pending;
use scenario::{load_table, Scenario, ScenarioArgs};

/// Quantum secret sharing simulator.
#[derive(Debug, Parser)]
#[command(name = "qss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and report its metrics
    Run {
        #[command(flatten)]
        scenario: Box<ScenarioArgs>,
        /// Transcript JSON path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-round CSV path
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Metrics JSON path (always printed to stdout as well)
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run several scenarios and print a side-by-side resource table
    Compare {
        /// Each scenario is a JSON config path or a quoted list of run flags.
        /// Options for `compare` itself must come before the scenarios.
        #[arg(required = true, num_args = 2.., allow_hyphen_values = true)]
        scenarios: Vec<String>,
        #[arg(long, value_enum, default_value = "ideal")]
        accounting: AccountingArg,
        /// Rows as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mutual information between the secret and a joint Bell measurement
    Leakage {
        /// Built-in table name (table1) or path to a JSON table
        #[arg(long, default_value = "table1")]
        table: String,
        #[arg(long, value_enum, default_value = "both")]
        conditioning: ConditioningArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AccountingArg {
    Ideal,
    Actual,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum ConditioningArg {
    Known,
    Unknown,
    Both,
}

#[derive(Debug, Serialize)]
struct Metrics {
    label: String,
    attack: String,
    rounds: usize,
    kept_rounds: usize,
    check_rounds: usize,
    key_bits: usize,
    efficiency: f64,
    qber: f64,
    aborted: bool,
    qber_detail: Option<QberSummary>,
    leak_rate: Option<f64>,
    attack_report: Option<AttackReport>,
    resources: Option<ResourceLedger>,
}

fn metrics(scenario: &Scenario, t: &Transcript) -> Result<Metrics> {
    Ok(Metrics {
        label: scenario.label.clone(),
        attack: t.attack.clone(),
        rounds: t.records.len(),
        kept_rounds: t.kept_rounds(),
        check_rounds: t.check_rounds,
        key_bits: t.alice_key.len(),
        efficiency: efficiency(t)?,
        qber: t.qber,
        aborted: t.aborted,
        qber_detail: qber_summary(t).ok(),
        leak_rate: t.attack_report.as_ref().and_then(|r| r.leak_rate),
        attack_report: t.attack_report.clone(),
        resources: resources(t, Accounting::Actual).ok(),
    })
}

fn simulate(s: &Scenario) -> Result<Transcript> {
    Ok(run(&s.config, s.table.as_ref(), &s.attack, &s.options)?)
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cmd_run(
    scenario: ScenarioArgs,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    metrics_path: Option<PathBuf>,
) -> Result<ExitCode> {
    let s = scenario.resolve()?;
    let t = simulate(&s)?;
    let summary = pretty(&metrics(&s, &t)?)?;
    let mut pending = Pending::default();
    pending.add(out.as_deref(), t.to_json());
    if csv.is_some() {
        let mut buf = Vec::new();
        t.write_csv(&mut buf)?;
        pending.add(csv.as_deref(), String::from_utf8(buf)?);
    }
    pending.add(metrics_path.as_deref(), summary.clone());
    pending.commit()?;
    print!("{summary}");
    if t.aborted {
        eprintln!(
            "aborted: check qber {:.4} exceeds threshold {}",
            t.qber, s.config.abort_qber_threshold
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

/// A scenario argument is either a JSON config path or whitespace-separated
/// run flags.
fn parse_scenario(text: &str) -> Result<Scenario> {
    #[derive(Parser)]
    #[command(name = "scenario", no_binary_name = true)]
    struct One {
        #[command(flatten)]
        scenario: ScenarioArgs,
    }
    let args = if text.ends_with(".json") && !text.contains(char::is_whitespace) {
        ScenarioArgs {
            config: Some(PathBuf::from(text)),
            ..ScenarioArgs::default()
        }
    } else {
        One::try_parse_from(text.split_whitespace())
            .map_err(|e| {
                let text = e.to_string();
                anyhow::anyhow!(text.trim_start_matches("error: ").trim_end().to_string())
            })?
            .scenario
    };
    args.resolve().with_context(|| format!("scenario {text:?}"))
}

fn cmd_compare(
    specs: Vec<String>,
    accounting: AccountingArg,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    if specs.len() < 2 {
        bail!("compare needs at least two scenarios");
    }
    let scenarios = specs
        .iter()
        .map(|s| parse_scenario(s))
        .collect::<Result<Vec<_>>>()?;
    let accounting = match accounting {
        AccountingArg::Ideal => Accounting::Ideal,
        AccountingArg::Actual => Accounting::Actual,
    };
    let mut rows = Vec::with_capacity(scenarios.len() + 1);
    for s in &scenarios {
        let t = simulate(s)?;
        rows.push(ComparisonRow {
            label: s.label.clone(),
            efficiency: efficiency(&t).ok(),
            qber: Some(t.qber),
            aborted: Some(t.aborted),
            per_bit: resources(&t, accounting).ok().and_then(|l| l.per_bit),
        });
    }
    rows.push(ComparisonRow::epr_reference());
    let mut pending = Pending::default();
    pending.add(out.as_deref(), pretty(&rows)?);
    pending.commit()?;
    print!("{}", analysis::render_table(&rows));
    Ok(ExitCode::SUCCESS)
}

fn cmd_leakage(
    table: &str,
    conditioning: ConditioningArg,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let table = load_table(table, 2)?;
    let wanted = match conditioning {
        ConditioningArg::Known => vec![Conditioning::BasisKnown],
        ConditioningArg::Unknown => vec![Conditioning::BasisUnknown],
        ConditioningArg::Both => vec![Conditioning::BasisKnown, Conditioning::BasisUnknown],
    };
    let reports = wanted
        .into_iter()
        .map(|c| leakage(&table, Observable::BellBasis, c))
        .collect::<Result<Vec<_>, _>>()?;
    let text = if reports.len() == 1 {
        pretty(&reports[0])?
    } else {
        pretty(&reports)?
    };
    let mut pending = Pending::default();
    pending.add(out.as_deref(), text.clone());
    pending.commit()?;
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            csv,
            metrics,
        } => cmd_run(*scenario, out, csv, metrics),
        Command::Compare {
            scenarios,
            accounting,
            out,
        } => cmd_compare(scenarios, accounting, out),
        Command::Leakage {
            table,
            conditioning,
            out,
        } => cmd_leakage(&table, conditioning, out),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
