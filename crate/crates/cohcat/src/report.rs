//! Structured sweep reports with deterministic CSV/JSON emission.
//!
//! A report is a table plus the resolved parameters and a pass/fail summary.
//! Emission is byte-stable for a fixed report: columns are fixed by the
//! producer, rows are ordered by trial index, parameters live in sorted
//! maps, and floats print with 12 significant digits so CSV output can be
//! reused as a regression fixture.

use std::collections::BTreeMap;

use serde::Serialize;

/// One table cell.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Aggregate outcome of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub violations: usize,
    pub passed: bool,
    /// Worst (smallest) observed margin per monitored inequality.
    pub worst_margins: BTreeMap<String, f64>,
}

/// Record of a sweep: inputs, per-trial rows, and the summary.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Summary,
}

/// 12 significant digits, scientific; stable across runs for equal values.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{x:.11e}")
}

impl ExperimentReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: BTreeMap::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            summary: Summary {
                trials: 0,
                violations: 0,
                passed: true,
                worst_margins: BTreeMap::new(),
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the declared columns"
        );
        self.rows.push(row);
    }

    /// Records a trial outcome and folds it into the summary.
    pub fn record(&mut self, passed: bool) {
        self.summary.trials += 1;
        if !passed {
            self.summary.violations += 1;
            self.summary.passed = false;
        }
    }

    /// Tracks the smallest observed value of a named margin.
    pub fn track_margin(&mut self, name: &str, value: f64) {
        self.summary
            .worst_margins
            .entry(name.to_string())
            .and_modify(|m| *m = m.min(value))
            .or_insert(value);
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    /// Header line plus one line per row, 12-significant-digit floats,
    /// `\n` line endings, trailing newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(v) => format_sig(*v),
                    Cell::Bool(v) => v.to_string(),
                    Cell::Text(v) => v.clone(),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Pretty JSON embedding the full resolved configuration.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
