//! Report assembly and the JSON / CSV writers.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Format, ResolvedConfig};
use crate::CliError;

pub const SCHEMA: &str = "caplight/v1";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits, no locale
            Cell::F(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::F(x) => format!("{x}"),
            Cell::U(x) => x.to_string(),
            Cell::B(x) => x.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => serde_json::Number::from_f64(*x).map_or_else(|| Value::String(x.to_string()), Value::Number),
            Cell::U(x) => Value::from(*x),
            Cell::B(x) => Value::from(*x),
            Cell::S(s) => Value::from(s.as_str()),
        }
    }
}

/// Rows of one command. `extras` (one per row, JSON only) carries
/// structured data that does not fit a CSV column.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub extras: Vec<Option<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.push_with(row, None);
    }

    pub fn push_with(&mut self, row: Vec<Cell>, extra: Option<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
        self.extras.push(extra);
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    fn json_rows(&self) -> Value {
        self.rows
            .iter()
            .zip(&self.extras)
            .map(|(row, extra)| {
                let mut obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(k, v)| (k.to_string(), v.json())).collect();
                if let Some(Value::Object(more)) = extra {
                    obj.extend(more.clone());
                }
                Value::Object(obj)
            })
            .collect()
    }
}

/// Outcome of a command before it is written.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    /// Contract violations; non-empty means exit code 1.
    pub failures: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    config: &'a ResolvedConfig,
    passed: bool,
    summary: &'a Value,
    failures: &'a [String],
    rows: Value,
}

/// Writes the report to `--out` or standard output.
pub fn emit(cfg: &ResolvedConfig, outcome: &Outcome) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match cfg.format {
        Format::Csv => outcome.table.write_csv(&mut buf).expect("writing to memory"),
        Format::Json => {
            let report = Report {
                schema: SCHEMA,
                config: cfg,
                passed: outcome.failures.is_empty(),
                summary: &outcome.summary,
                failures: &outcome.failures,
                rows: outcome.table.json_rows(),
            };
            serde_json::to_writer_pretty(&mut buf, &report).expect("report serializes");
            buf.push(b'\n');
        }
    }
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &buf).map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&buf).and_then(|_| out.flush()).map_err(|e| CliError::invalid(format!("stdout: {e}")))
        }
    }
}
