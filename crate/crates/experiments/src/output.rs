//! Result rows and the files written for each run: `<id>.csv`, the sidecar
//! `<id>.json` and `<id>.timings.csv`. Wall-clock times live only in the
//! timings file, so the other two are reproducible byte for byte.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentId;
use crate::Result;

pub const CSV_HEADER: [&str; 9] =
    ["experiment", "case", "quantity", "params", "measured", "relation", "bound", "slack", "pass"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Reported only.
    Report,
    /// `measured <= bound + slack`
    Le,
    /// `measured >= bound - slack`
    Ge,
    /// `|measured - bound| <= slack`
    Near,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Report => "report",
            Relation::Le => "le",
            Relation::Ge => "ge",
            Relation::Near => "near",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: ExperimentId,
    pub case: String,
    pub quantity: String,
    /// `key=value` pairs joined by `;`.
    pub params: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub pass: Option<bool>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

impl ResultRow {
    pub fn new(experiment: ExperimentId, case: impl Into<String>, quantity: impl Into<String>) -> Self {
        ResultRow {
            experiment,
            case: case.into(),
            quantity: quantity.into(),
            params: String::new(),
            measured: f64::NAN,
            relation: Relation::Report,
            bound: None,
            slack: None,
            pass: None,
            runtime_ms: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        if !self.params.is_empty() {
            self.params.push(';');
        }
        self.params.push_str(&format!("{key}={value}"));
        self
    }

    pub fn measured(mut self, value: f64) -> Self {
        self.measured = value;
        self
    }

    pub fn report(self) -> Self {
        self.check(Relation::Report, None, None)
    }

    /// Report alongside a reference value that is not asserted.
    pub fn against(self, reference: f64) -> Self {
        self.check(Relation::Report, Some(reference), None)
    }

    pub fn le(self, bound: f64, slack: f64) -> Self {
        self.check(Relation::Le, Some(bound), Some(slack))
    }

    pub fn ge(self, bound: f64, slack: f64) -> Self {
        self.check(Relation::Ge, Some(bound), Some(slack))
    }

    pub fn near(self, target: f64, slack: f64) -> Self {
        self.check(Relation::Near, Some(target), Some(slack))
    }

    fn check(mut self, relation: Relation, bound: Option<f64>, slack: Option<f64>) -> Self {
        self.relation = relation;
        self.bound = bound;
        self.slack = slack;
        let (m, b, s) = (self.measured, bound.unwrap_or(f64::NAN), slack.unwrap_or(0.0));
        self.pass = match relation {
            Relation::Report => None,
            Relation::Le => Some(m <= b + s),
            Relation::Ge => Some(m >= b - s),
            Relation::Near => Some((m - b).abs() <= s),
        };
        self
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub experiment: ExperimentId,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<ResultRow>,
}

/// Paths of the files written by [`ExperimentOutput::write`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub timings: PathBuf,
}

impl ExperimentOutput {
    pub fn asserted(&self) -> usize {
        self.rows.iter().filter(|r| r.pass.is_some()).count()
    }

    pub fn failures(&self) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.failed()).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| !r.failed())
    }

    pub fn rows_for(&self, quantity: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.quantity == quantity).collect()
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.as_str().to_string(),
                r.case.clone(),
                r.quantity.clone(),
                r.params.clone(),
                r.measured.to_string(),
                r.relation.to_string(),
                opt(r.bound),
                opt(r.slack),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.experiment,
            "config": self.config,
            "config_hash": self.config_hash,
            "seeds": self.seeds,
            "version": env!("CARGO_PKG_VERSION"),
            "columns": CSV_HEADER,
            "rows": self.rows.len(),
            "asserted": self.asserted(),
            "failures": self.failures().len(),
        })
    }

    pub fn timings_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "case", "quantity", "params", "runtime_ms"])?;
        for r in &self.rows {
            w.write_record([
                r.experiment.as_str(),
                &r.case,
                &r.quantity,
                &r.params,
                &format!("{:.3}", r.runtime_ms),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
    }

    pub fn write(&self, dir: &Path) -> Result<OutputFiles> {
        fs::create_dir_all(dir)?;
        let stem = self.experiment.as_str();
        let files = OutputFiles {
            csv: dir.join(format!("{stem}.csv")),
            sidecar: dir.join(format!("{stem}.json")),
            timings: dir.join(format!("{stem}.timings.csv")),
        };
        fs::write(&files.csv, self.csv_string()?)?;
        fs::write(&files.sidecar, serde_json::to_string_pretty(&self.sidecar())? + "\n")?;
        fs::write(&files.timings, self.timings_string()?)?;
        Ok(files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flags() {
        let r = ResultRow::new(ExperimentId::Weak, "c", "q").measured(1.0);
        assert_eq!(r.clone().le(1.0, 0.0).pass, Some(true));
        assert_eq!(r.clone().le(0.5, 0.1).pass, Some(false));
        assert_eq!(r.clone().ge(1.2, 0.1).pass, Some(false));
        assert_eq!(r.clone().near(1.5, 0.5).pass, Some(true));
        assert_eq!(r.clone().report().pass, None);
        let nan = ResultRow::new(ExperimentId::Weak, "c", "q").le(1.0, 0.0);
        assert!(nan.failed());
    }

    #[test]
    fn csv_layout() {
        let out = ExperimentOutput {
            experiment: ExperimentId::Metrics,
            config: serde_json::json!({}),
            config_hash: "h".into(),
            seeds: vec![1],
            rows: vec![ResultRow::new(ExperimentId::Metrics, "pair", "d_w").param("i", 0).param("a", 1.5).measured(0.25).le(0.5, 1e-9)],
        };
        let text = out.csv_string().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "E-METRICS,pair,d_w,i=0;a=1.5,0.25,le,0.5,0.000000001,true");
    }
}
