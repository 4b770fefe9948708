use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ReportFormat;
use crate::admm::IterationRecord;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    /// Test accuracy.
    pub accuracy: f64,
    pub train_accuracy: f64,
    /// `accuracy` minus the vanilla test accuracy.
    pub delta_accuracy: f64,
    pub tcd: usize,
    /// Vanilla depth over this depth.
    pub speedup: f64,
    /// `accuracy · speedup`.
    pub metric: f64,
    pub masked: usize,
    pub converged_at: Option<usize>,
    pub noisy_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodTrace {
    pub method: String,
    pub iterations: Vec<IterationRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub dataset: String,
    pub rows: Vec<MethodRow>,
    pub traces: Vec<MethodTrace>,
}

const CSV_HEADER: &str =
    "method,accuracy,train_accuracy,delta_accuracy,tcd,speedup,metric,masked,converged_at,noisy_accuracy";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), T::to_string)
}

impl Report {
    pub fn row(&self, method: &str) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// One line per method. Floats use the shortest exact representation.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# seed={} config={} version={}\n{CSV_HEADER}\n", self.seed, self.config_hash, self.version);
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.method,
                r.accuracy,
                r.train_accuracy,
                r.delta_accuracy,
                r.tcd,
                r.speedup,
                r.metric,
                r.masked,
                opt(&r.converged_at),
                opt(&r.noisy_accuracy)
            ));
        }
        s
    }

    /// Parses the rows written by [`Report::to_csv`].
    pub fn rows_from_csv(text: &str) -> Result<Vec<MethodRow>> {
        fn field<T: std::str::FromStr>(line: usize, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::parse(line, format!("bad field {v:?}")))
        }
        fn opt_field<T: std::str::FromStr>(line: usize, v: &str) -> Result<Option<T>> {
            if v.is_empty() {
                Ok(None)
            } else {
                field(line, v).map(Some)
            }
        }
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.starts_with('#') || line == CSV_HEADER || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(Error::parse(n, format!("expected 10 fields, got {}", f.len())));
            }
            rows.push(MethodRow {
                method: f[0].to_string(),
                accuracy: field(n, f[1])?,
                train_accuracy: field(n, f[2])?,
                delta_accuracy: field(n, f[3])?,
                tcd: field(n, f[4])?,
                speedup: field(n, f[5])?,
                metric: field(n, f[6])?,
                masked: field(n, f[7])?,
                converged_at: opt_field(n, f[8])?,
                noisy_accuracy: opt_field(n, f[9])?,
            });
        }
        Ok(rows)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(e.to_string()))
    }

    /// Aligned text table: accuracy with its change against vanilla, depth
    /// with its speedup.
    pub fn to_table(&self) -> String {
        let noisy = self.rows.iter().any(|r| r.noisy_accuracy.is_some());
        let mut lines = vec![format!(
            "{:<18} {:>20} {:>16}{}",
            "method",
            "accuracy (delta)",
            "tcd (speedup)",
            if noisy { format!(" {:>12}", "noisy acc") } else { String::new() }
        )];
        for r in &self.rows {
            let acc = format!("{:.2}% ({:+.2}%)", 100.0 * r.accuracy, 100.0 * r.delta_accuracy);
            let depth = format!("{} ({:.2}x)", r.tcd, r.speedup);
            let n = match r.noisy_accuracy {
                Some(a) => format!(" {:>11.2}%", 100.0 * a),
                None if noisy => format!(" {:>12}", "-"),
                None => String::new(),
            };
            lines.push(format!("{:<18} {acc:>20} {depth:>16}{n}", r.method));
        }
        lines.push(format!("seed {}  config {}", self.seed, &self.config_hash[..self.config_hash.len().min(12)]));
        lines.join("\n") + "\n"
    }
}

pub fn render_report(report: &Report, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Table => Ok(report.to_table()),
        ReportFormat::Csv => Ok(report.to_csv()),
        ReportFormat::Json => report.to_json(),
    }
}

pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(report, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            version: "0".into(),
            seed: 3,
            config_hash: "ab".repeat(32),
            dataset: "syn4".into(),
            rows: vec![
                MethodRow {
                    method: "vanilla".into(),
                    accuracy: 0.9,
                    train_accuracy: 0.95,
                    delta_accuracy: 0.0,
                    tcd: 51,
                    speedup: 1.0,
                    metric: 0.9,
                    masked: 0,
                    converged_at: None,
                    noisy_accuracy: Some(0.8),
                },
                MethodRow {
                    method: "comp-aware".into(),
                    accuracy: 1.0,
                    train_accuracy: 1.0 / 3.0,
                    delta_accuracy: 0.1 - 1e-17,
                    tcd: 20,
                    speedup: 51.0 / 20.0,
                    metric: 2.55,
                    masked: 10,
                    converged_at: Some(7),
                    noisy_accuracy: None,
                },
            ],
            traces: vec![],
        }
    }

    #[test]
    fn csv_and_json_round_trip() {
        let r = sample();
        assert_eq!(Report::rows_from_csv(&r.to_csv()).unwrap(), r.rows);
        assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
        let t = r.to_table();
        assert!(t.contains("2.55x") && t.contains("+10.00%") && t.contains("80.00%"));
    }
}
