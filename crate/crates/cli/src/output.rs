use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

pub const SCHEMA: &str = "levcap/1";
const SIGNIFICANT: i32 = 12;

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Fixed-point decimal with 12 significant digits.
pub fn decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let places = (SIGNIFICANT - 1 - magnitude).max(0) as usize;
    format!("{v:.places$}")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => decimal(*v),
                    Cell::Text(t) => quote(t),
                    Cell::Empty => String::new(),
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Rows as JSON objects keyed by the header.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.header.iter().zip(row) {
                    let v = match cell {
                        Cell::Num(v) => number(*v),
                        Cell::Text(t) => Value::String(t.clone()),
                        Cell::Empty => Value::Null,
                    };
                    obj.insert((*name).to_string(), v);
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

fn quote(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Non-finite values become `null`.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

/// Attaches the table either as a CSV file or inline under `rows`.
pub fn attach_table(report: &mut Map<String, Value>, table: &Table, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            table.write(path)?;
            report.insert("csv".into(), Value::String(path.display().to_string()));
            report.insert("csv_rows".into(), Value::from(table.len()));
        }
        None => {
            report.insert("rows".into(), table.to_json());
        }
    }
    Ok(())
}

pub fn emit(command: &str, mut body: Map<String, Value>) -> Result<(), CliError> {
    let mut report = Map::new();
    report.insert("schema".into(), Value::String(SCHEMA.into()));
    report.insert("command".into(), Value::String(command.into()));
    report.append(&mut body);
    let text = serde_json::to_string_pretty(&Value::Object(report)).map_err(|e| CliError::Io(e.to_string()))?;
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}
