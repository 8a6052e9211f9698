//! Tables and their CSV / JSON serialization.

use homogenizer::analysis::TREND_SLACK;
use homogenizer::tolerances::*;
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(usize),
    Real(f64),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => real(*v),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Real(v) if v.is_finite() => Value::from(*v),
            Cell::Real(v) => Value::String(real(*v)),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_owned()
    } else if v > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn metadata(config: &RunConfig) -> Vec<(&'static str, String)> {
    let tolerances = [
        ("invariant", INVARIANT_TOL),
        ("identity", IDENTITY_TOL),
        ("single_qubit_engine", SINGLE_QUBIT_ENGINE_TOL),
        ("closed_form", CLOSED_FORM_TOL),
        ("symmetry", SYMMETRY_TOL),
        ("linearity", LINEARITY_TOL),
        ("weak_compare_gap", WEAK_COMPARE_GAP_TOL),
        ("weak_entropy_excess", WEAK_ENTROPY_EXCESS_TOL),
        ("weak_entropy_rise_ratio", WEAK_ENTROPY_RISE_RATIO),
        ("trend_slack", TREND_SLACK),
    ]
    .iter()
    .map(|(k, v)| format!("{k}={v:e}"))
    .collect::<Vec<_>>()
    .join(" ");
    vec![
        ("version", format!("homogenizer {}", env!("CARGO_PKG_VERSION"))),
        ("command", config.command.label().to_owned()),
        ("config_sha256", config.hash()),
        ("grid_cap", config.grid_cap.to_string()),
        ("exact_cap", config.exact_cap.to_string()),
        ("tolerances", tolerances),
    ]
}

/// `# key: value` lines followed by the header and one line per row.
pub fn to_csv(table: &Table, meta: &[(&'static str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// An array of row objects keyed by column name.
pub fn to_json(table: &Table) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(k, c)| ((*k).to_owned(), c.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("rows serialize");
    s.push('\n');
    s
}

pub fn meta_json(meta: &[(&'static str, String)]) -> String {
    let obj: Map<String, Value> = meta
        .iter()
        .map(|(k, v)| ((*k).to_owned(), Value::String(v.clone())))
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("metadata serializes");
    s.push('\n');
    s
}

pub struct Rendered {
    pub body: String,
    /// JSON only: metadata for the sidecar file or stderr.
    pub sidecar: Option<String>,
}

pub fn render(table: &Table, config: &RunConfig) -> Rendered {
    let meta = metadata(config);
    match config.format {
        Format::Csv => Rendered {
            body: to_csv(table, &meta),
            sidecar: None,
        },
        Format::Json => Rendered {
            body: to_json(table),
            sidecar: Some(meta_json(&meta)),
        },
    }
}
