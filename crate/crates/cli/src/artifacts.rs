//! Output artifacts. Tables and matrices render either as RFC-4180 CSV with
//! shortest round-trip floats or as JSON; sidecars are always JSON.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Location;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(x) => float(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => finite(*x).map(Value::from).unwrap_or(Value::Null),
            Cell::I(i) => Value::from(*i),
            Cell::S(s) => Value::from(s.clone()),
            Cell::B(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv_writer();
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).expect("in-memory write");
        }
        finish(w)
    }

    pub fn to_json(&self) -> String {
        let t = TableArtifact {
            columns: self.columns.iter().map(|c| c.to_string()).collect(),
            rows: self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect(),
        };
        to_json(&t)
    }
}

/// 2-D map: one row per `row_values` entry, one column per `column_values`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub row_axis: &'static str,
    pub column_axis: &'static str,
    pub row_values: Vec<f64>,
    pub column_values: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Matrix {
    /// First row: corner label then the column grid; each further row: the
    /// row coordinate then its values.
    pub fn to_csv(&self) -> String {
        let mut w = csv_writer();
        let corner = format!("{}\\{}", self.row_axis, self.column_axis);
        w.write_record(std::iter::once(corner).chain(self.column_values.iter().map(|x| float(*x)))).expect("in-memory write");
        for (r, row) in self.row_values.iter().zip(&self.values) {
            w.write_record(std::iter::once(float(*r)).chain(row.iter().map(|x| float(*x)))).expect("in-memory write");
        }
        finish(w)
    }

    pub fn to_json(&self) -> String {
        let m = MatrixArtifact {
            row_axis: self.row_axis.to_string(),
            column_axis: self.column_axis.to_string(),
            row_values: self.row_values.clone(),
            column_values: self.column_values.clone(),
            values: self.values.iter().map(|r| r.iter().map(|x| finite(*x)).collect()).collect(),
        };
        to_json(&m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primary {
    Table(Table),
    Matrix(Matrix),
}

impl Primary {
    pub fn render(&self, json: bool) -> String {
        match (self, json) {
            (Primary::Table(t), false) => t.to_csv(),
            (Primary::Table(t), true) => t.to_json(),
            (Primary::Matrix(m), false) => m.to_csv(),
            (Primary::Matrix(m), true) => m.to_json(),
        }
    }
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable artifact");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableArtifact {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixArtifact {
    pub row_axis: String,
    pub column_axis: String,
    pub row_values: Vec<f64>,
    pub column_values: Vec<f64>,
    /// Non-finite entries (e.g. a perfect transmission zero in dB) are null.
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    /// Config path, or `preset:<name>` for a built-in preset.
    pub config_source: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub format: String,
    pub started_unix_s: f64,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub summary: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorReport {
    pub code: String,
    pub module: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferBudget {
    #[serde(rename = "final")]
    pub final_population: f64,
    pub prep: f64,
    pub leakage: f64,
    pub decoherence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSummary {
    pub scenario: String,
    pub r: f64,
    pub seed: u64,
    pub n_realizations: usize,
    pub n_cells: usize,
    pub edge_mean_hz: [Option<f64>; 2],
    pub edge_std_hz: [Option<f64>; 2],
    pub failed_count: usize,
    pub edge_missing_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct S21Sidecar {
    pub delta_n: usize,
    pub sublattices: String,
    pub phase: String,
    pub bath: String,
    pub branch: String,
    pub g_hz: f64,
    pub gamma_prime_hz: f64,
    pub gamma_phi_hz: f64,
    pub tuning_range_hz: [f64; 2],
    pub swirl_centers_hz: Vec<f64>,
    pub superradiant_frequencies_hz: Vec<f64>,
}
