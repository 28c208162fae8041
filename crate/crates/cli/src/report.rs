//! Report and CSV emission.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::{Map, Value};

/// A named quantity and the bound it must stay below.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            pass: value < threshold,
        }
    }
}

/// Columns of a CSV time series.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Result of one command before it is written out.
#[derive(Debug)]
pub struct Outcome {
    pub result: Map<String, Value>,
    pub checks: Vec<Check>,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    timestamp: u64,
    seed: Option<u64>,
    ode_tol: f64,
    pass: bool,
    checks: &'a [Check],
    #[serde(flatten)]
    result: &'a Map<String, Value>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    timestamp: u64,
    pass: bool,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
pub struct ErrorBody<'a> {
    pub kind: &'a str,
    pub message: String,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `<out>/<command>.json` and, when present, `<out>/<command>.csv`.
pub fn write(out: &Path, command: &str, seed: Option<u64>, ode_tol: f64, outcome: &Outcome) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let json = out.join(format!("{command}.json"));
    let report = Report {
        command,
        timestamp: now(),
        seed,
        ode_tol,
        pass: outcome.pass(),
        checks: &outcome.checks,
        result: &outcome.result,
    };
    write_json(&json, &report)?;
    let mut written = vec![json];
    if let Some(table) = &outcome.table {
        let path = out.join(format!("{command}.csv"));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the diagnostics of an aborted run to `<out>/<command>.json`.
pub fn write_error(out: &Path, command: &str, error: ErrorBody<'_>) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let json = out.join(format!("{command}.json"));
    write_json(
        &json,
        &ErrorReport {
            command,
            timestamp: now(),
            pass: false,
            error,
        },
    )?;
    Ok(json)
}
