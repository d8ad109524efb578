//! Report emission in JSON, CSV or text, each carrying the config echo.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::input::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything that determines a run, echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub grid_spacing: f64,
    pub rank_threshold: f64,
    pub lp_budget: usize,
    pub cover_cap: usize,
    pub heuristic_cover: bool,
    pub refine: bool,
    pub c: Option<f64>,
    pub seed: u64,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |name: &str| Err(CliError::Input(format!("--{name} must be positive and finite")));
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return bad("grid");
        }
        if !(self.rank_threshold > 0.0 && self.rank_threshold.is_finite()) {
            return bad("rank-tol");
        }
        if self.lp_budget == 0 {
            return bad("budget");
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return bad("c");
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    report: &'a T,
}

/// Rows for CSV output; reports without one are flattened to `key,value`.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest decimal that agrees with `v` to 15 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap_or(v);
    format!("{rounded}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), num)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
        other => out.push(vec![prefix.to_string(), other.to_string()]),
    }
}

pub struct Emitter<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
}

impl Emitter<'_> {
    pub fn emit<T: Serialize>(&self, report: &T, text: &str, table: Option<Table>) -> CliResult<()> {
        let envelope = Envelope {
            tool: "norming-lab",
            version: norming_core::VERSION,
            command: self.command,
            config: self.config,
            report,
        };
        let echo = serde_json::to_string(self.config).map_err(|e| CliError::Input(e.to_string()))?;
        let body = match self.config.output.format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&envelope).map_err(|e| CliError::Input(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Text => format!(
                "# norming-lab {} {}\n# config {echo}\n{text}",
                norming_core::VERSION,
                self.command
            ),
            Format::Csv => {
                let table = match table {
                    Some(t) => t,
                    None => {
                        let value = serde_json::to_value(report).map_err(|e| CliError::Input(e.to_string()))?;
                        let mut rows = Vec::new();
                        flatten("", &value, &mut rows);
                        Table {
                            headers: vec!["key".into(), "value".into()],
                            rows,
                        }
                    }
                };
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| CliError::Input(e.to_string());
                w.write_record(&table.headers).map_err(io)?;
                for r in &table.rows {
                    w.write_record(r).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
                format!(
                    "# norming-lab {} {}\n# config {echo}\n{}",
                    norming_core::VERSION,
                    self.command,
                    String::from_utf8_lossy(&bytes)
                )
            }
        };
        match &self.config.output.path {
            Some(path) => fs::write(path, body)
                .map_err(|e| CliError::Input(format!("cannot write `{}`: {e}", path.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
            }
        }
    }
}
