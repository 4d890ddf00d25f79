//! CSV and JSON output.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::Serialize;

use frsr::harness::{ClauseSummary, GridReport};
use frsr::VerificationRecord;

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to reproduce any `f64` exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Comma-separated table with a header row and LF line endings.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

#[derive(Debug, Serialize)]
struct RunInfo {
    seed: u64,
    /// Seconds since the epoch from `SOURCE_DATE_EPOCH`, otherwise null so
    /// that repeated runs stay byte-identical.
    timestamp: Option<u64>,
    tool_version: &'static str,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    per_proposition: &'a IndexMap<String, ClauseSummary>,
}

#[derive(Debug, Serialize)]
struct JsonReport<'a> {
    run: RunInfo,
    records: &'a [VerificationRecord],
    summary: Summary<'a>,
}

pub fn source_date_epoch() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

pub fn verify_json(seed: u64, report: &GridReport) -> Result<String, CliError> {
    let doc = JsonReport {
        run: RunInfo {
            seed,
            timestamp: source_date_epoch(),
            tool_version: TOOL_VERSION,
        },
        records: &report.records,
        summary: Summary { per_proposition: &report.summary },
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn summary_csv(report: &GridReport) -> String {
    let mut csv = Csv::new(&["proposition", "premise_failures", "conclusion_failures", "passes", "errored"]);
    for (key, s) in &report.summary {
        csv.push(vec![
            key.clone(),
            s.premise_failures.to_string(),
            s.conclusion_failures.to_string(),
            s.passes.to_string(),
            s.errored.to_string(),
        ]);
    }
    csv.render()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}
