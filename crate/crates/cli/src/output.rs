use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::{Map, Value};
use tontine_core::TontineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A rectangular result: CSV rows, or a JSON array of objects.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    /// Full precision.
    Number(f64),
    /// Printed with a fixed number of decimals.
    Fixed(f64, usize),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number(x) => x.to_string(),
            Cell::Fixed(x, places) => format!("{x:.places$}"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Number(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Fixed(x, places) => {
                let rounded: f64 = format!("{x:.places$}").parse().unwrap_or(*x);
                serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
            }
            Cell::Empty => Value::Null,
        }
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, TontineError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::render))?;
                }
                let bytes = w.into_inner().map_err(|e| TontineError::Io(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| TontineError::Io(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: Map<String, Value> =
                            self.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                        Value::Object(map)
                    })
                    .collect();
                pretty(&Value::Array(rows))
            }
        }
    }
}

pub fn pretty(value: &Value) -> Result<String, TontineError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| TontineError::Io(e.to_string()))
}

/// Directory named by `TONTINE_OUT_DIR`, if set.
pub fn default_dir() -> Option<PathBuf> {
    std::env::var_os("TONTINE_OUT_DIR").map(PathBuf::from)
}

/// Writes to `out` (resolved against `TONTINE_OUT_DIR`) or stdout.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), TontineError> {
    match out {
        Some(path) => {
            let path = match default_dir() {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.to_path_buf(),
            };
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, text)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
