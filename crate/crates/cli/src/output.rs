//! JSON and CSV rendering.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use vext_core::condexp::PropertyCheck;
use vext_core::suite::{CheckReport, ExtensionScenarioReport, NormScenarioReport};

use crate::config::CliError;
use crate::OutputArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes `json` (pretty-printed) or `rows` (as CSV) to `--out` or stdout.
pub fn emit<J: Serialize, R: Serialize>(json: &J, rows: &[R], out: &OutputArgs) -> Result<(), CliError> {
    let bytes = match out.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(json)?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| CliError::Io(format!("csv: {e}")))?;
            }
            w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))?
        }
    };
    match &out.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

#[derive(Serialize)]
pub struct CheckRow<'a> {
    suite: &'a str,
    check: &'a str,
    instances: usize,
    max_residual: f64,
    bound: f64,
    pass: bool,
}

pub fn check_rows(checks: &[CheckReport]) -> Vec<CheckRow<'_>> {
    checks
        .iter()
        .map(|c| CheckRow {
            suite: &c.suite,
            check: &c.check,
            instances: c.instances,
            max_residual: c.max_residual,
            bound: c.bound,
            pass: c.pass,
        })
        .collect()
}

#[derive(Serialize)]
pub struct ExtensionRow {
    trials: usize,
    max_residual: f64,
    max_ratio: f64,
    m_norm: f64,
    operator_norm: f64,
    pass: bool,
}

impl From<&ExtensionScenarioReport> for ExtensionRow {
    fn from(r: &ExtensionScenarioReport) -> Self {
        Self {
            trials: r.trials,
            max_residual: r.max_residual,
            max_ratio: r.max_ratio,
            m_norm: r.m_norm,
            operator_norm: r.operator_norm,
            pass: r.pass,
        }
    }
}

#[derive(Serialize)]
pub struct NormRow {
    value: f64,
    exact: bool,
    m_norm: f64,
    witness: String,
}

impl From<&NormScenarioReport> for NormRow {
    fn from(r: &NormScenarioReport) -> Self {
        Self {
            value: r.value,
            exact: r.exact,
            m_norm: r.m_norm,
            witness: r.witness.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
        }
    }
}

#[derive(Serialize)]
pub struct C0Row {
    pub k: usize,
    pub value: f64,
}

#[derive(Serialize)]
pub struct PropertyRow<'a> {
    check: &'a str,
    max_residual: f64,
    bound: f64,
    pass: bool,
    auxiliary: bool,
}

pub fn property_rows(checks: &[PropertyCheck]) -> Vec<PropertyRow<'_>> {
    checks
        .iter()
        .map(|c| PropertyRow {
            check: &c.name,
            max_residual: c.max_residual,
            bound: c.bound,
            pass: c.pass,
            auxiliary: c.auxiliary,
        })
        .collect()
}
