//! `vext`: runs the verification suites and scenario checks, writing JSON or
//! CSV reports.
//!
//! Exit codes: 0 when every assertion passes, 1 when one fails (the report
//! carries the failing witness), 2 for malformed configuration or usage.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use vext_core::condexp::CondExpReport;
use vext_core::limits::{c0_counterexample, l1_counterexample};
use vext_core::suite::{
    self, CheckReport, CondExpScenario, ExtensionScenario, ExtensionScenarioReport, NormScenario, RunReport,
    SqfnSummary, Suite, SuiteConfig,
};

use crate::config::{load_json, CliError};
use crate::output::{emit, Format};

#[derive(Parser, Debug)]
#[command(name = "vext", version, about = "Verify vector-valued extensions of operators on finite Banach function spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites, or a scenario given with --config.
    Verify {
        target: VerifyTarget,
        #[command(flatten)]
        common: Common,
    },
    /// Operator-norm fixtures and invariants, or the norm of one operator
    /// given with --config.
    Norms {
        #[command(flatten)]
        common: Common,
    },
    /// Diagnostics showing why c0- and l1-valued extensions of a Banach limit
    /// fail.
    Counterexample {
        #[arg(long, value_enum)]
        space: Space,
        /// Cesàro window length.
        #[arg(long = "N", default_value_t = 10_000)]
        window: usize,
        /// Number of leading coordinates inspected.
        #[arg(long = "K", default_value_t = 100)]
        head: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conditional-expectation checks for a scenario file.
    Condexp {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyTarget {
    All,
    Extension,
    Sqfn,
    Condexp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Space {
    C0,
    L1,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per randomized check (overrides the config file).
    #[arg(long)]
    trials: Option<usize>,
    /// JSON configuration or scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("vext: {e}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every assertion passed.
fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify { target, common } => verify(target, &common),
        Command::Norms { common } => norms(&common),
        Command::Counterexample {
            space,
            window,
            head,
            output,
        } => counterexample(space, window, head, &output),
        Command::Condexp { config, output } => {
            let sc: CondExpScenario = load_json(&config)?;
            emit_condexp(&suite::run_condexp_scenario(&sc)?, &output)
        }
    }
}

fn suite_config(common: &Common, suites: Vec<Suite>) -> Result<SuiteConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_json::<SuiteConfig>(path)?,
        None => SuiteConfig::default(),
    };
    // a config naming its own suites keeps them for `verify all`
    if common.config.is_none() || suites.len() == 1 {
        cfg.suites = suites;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// True when the config file is an object carrying `key`, which selects the
/// scenario form over a suite configuration.
fn is_scenario(common: &Common, key: &str) -> Result<bool, CliError> {
    match &common.config {
        None => Ok(false),
        Some(path) => {
            let v: Value = load_json(path)?;
            Ok(v.get(key).is_some())
        }
    }
}

fn verify(target: VerifyTarget, common: &Common) -> Result<bool, CliError> {
    match target {
        VerifyTarget::All => emit_run(&suite::run_suites(&suite_config(common, Suite::ALL.to_vec())?)?, &common.output),
        VerifyTarget::Extension if is_scenario(common, "operator")? => {
            let path = common.config.as_ref().expect("scenario has a path");
            let mut sc: ExtensionScenario = load_json(path)?;
            if let Some(s) = common.seed {
                sc.seed = s;
            }
            if let Some(t) = common.trials {
                sc.trials = t;
            }
            emit_extension(&suite::run_extension_scenario(&sc)?, &common.output)
        }
        VerifyTarget::Extension => emit_run(&suite::run_suites(&suite_config(common, vec![Suite::Extension])?)?, &common.output),
        VerifyTarget::Sqfn => {
            let report = suite::run_suites(&suite_config(common, vec![Suite::Sqfn])?)?;
            let out = SqfnOutput {
                summary: SqfnSummary::from_checks(&report.checks),
                seed: report.seed,
                trials: report.trials,
                checks: report.checks,
            };
            emit(&out, &output::check_rows(&out.checks), &common.output)?;
            report_failures(&out.checks);
            Ok(out.summary.pass)
        }
        VerifyTarget::Condexp if is_scenario(common, "weights")? => {
            let path = common.config.as_ref().expect("scenario has a path");
            let mut sc: CondExpScenario = load_json(path)?;
            if let Some(s) = common.seed {
                sc.seed = s;
            }
            if let Some(t) = common.trials {
                sc.trials = t;
            }
            emit_condexp(&suite::run_condexp_scenario(&sc)?, &common.output)
        }
        VerifyTarget::Condexp => emit_run(&suite::run_suites(&suite_config(common, vec![Suite::Condexp])?)?, &common.output),
    }
}

#[derive(Serialize)]
struct SqfnOutput {
    #[serde(flatten)]
    summary: SqfnSummary,
    seed: u64,
    trials: usize,
    checks: Vec<CheckReport>,
}

fn norms(common: &Common) -> Result<bool, CliError> {
    if is_scenario(common, "operator")? {
        let path = common.config.as_ref().expect("scenario has a path");
        let mut sc: NormScenario = load_json(path)?;
        if common.seed.is_some() {
            sc.seed = common.seed;
        }
        let r = suite::run_norm_scenario(&sc)?;
        emit(&r, &[output::NormRow::from(&r)], &common.output)?;
        return Ok(true);
    }
    emit_run(&suite::run_suites(&suite_config(common, vec![Suite::Norms])?)?, &common.output)
}

fn counterexample(space: Space, window: usize, head: usize, out: &OutputArgs) -> Result<bool, CliError> {
    match space {
        Space::C0 => {
            let d = c0_counterexample(window, head)?;
            let rows: Vec<output::C0Row> = d
                .values
                .iter()
                .enumerate()
                .map(|(k, &value)| output::C0Row { k, value })
                .collect();
            emit(&d, &rows, out)?;
        }
        Space::L1 => {
            let d = l1_counterexample(window, head)?;
            emit(&d, std::slice::from_ref(&d), out)?;
        }
    }
    Ok(true)
}

fn emit_run(report: &RunReport, out: &OutputArgs) -> Result<bool, CliError> {
    emit(report, &output::check_rows(&report.checks), out)?;
    report_failures(&report.checks);
    Ok(report.pass)
}

fn emit_extension(report: &ExtensionScenarioReport, out: &OutputArgs) -> Result<bool, CliError> {
    emit(report, &[output::ExtensionRow::from(report)], out)?;
    if let Some(w) = &report.witness {
        eprintln!("vext: extension scenario failed; witness: {}", serde_json::to_string(w)?);
    }
    Ok(report.pass)
}

fn emit_condexp(report: &CondExpReport, out: &OutputArgs) -> Result<bool, CliError> {
    emit(report, &output::property_rows(&report.checks), out)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("vext: check {} failed: {} > {}", c.name, c.max_residual, c.bound);
    }
    Ok(report.pass)
}

fn report_failures(checks: &[CheckReport]) {
    for c in checks.iter().filter(|c| !c.pass) {
        let w = c
            .witness
            .as_ref()
            .and_then(|w| serde_json::to_string(w).ok())
            .unwrap_or_else(|| "null".into());
        eprintln!("vext: check {}/{} failed ({} vs bound {}); witness: {w}", c.suite, c.check, c.max_residual, c.bound);
    }
}
