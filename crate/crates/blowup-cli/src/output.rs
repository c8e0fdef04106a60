//! Table and summary writers.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`, so output files are byte-identical across runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => Value::from(*v),
            Cell::Num(v) => Value::from(fmt_f64(*v)),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip form; `inf`, `-inf` and `nan` for the rest.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// A table with fixed column names.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes the output files of one run into a directory.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), format, written: Vec::new() })
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json` and returns the file
    /// name. An empty table still gets its header.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<String, CliError> {
        let name = match self.format {
            Format::Csv => format!("{stem}.csv"),
            Format::Json => format!("{stem}.json"),
        };
        let path = self.dir.join(&name);
        match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
                w.write_record(table.columns).map_err(|e| io_err(&path, e))?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::text)).map_err(|e| io_err(&path, e))?;
                }
                w.flush().map_err(|e| io_err(&path, e))?;
            }
            Format::Json => {
                let rows: Vec<Value> = table
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            table.columns.iter().zip(row).map(|(c, v)| ((*c).to_owned(), v.json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({ "columns": table.columns, "rows": rows });
                write_json(&path, &doc)?;
            }
        }
        self.written.push(name.clone());
        Ok(name)
    }

    /// Writes `summary.json`, listing every file written before it.
    pub fn summary<T: Serialize>(&mut self, summary: &T) -> Result<(), CliError> {
        let mut doc = serde_json::to_value(summary).map_err(|e| CliError::Io(e.to_string()))?;
        if let Value::Object(map) = &mut doc {
            map.insert("files".into(), Value::from(self.written.clone()));
        }
        write_json(&self.dir.join("summary.json"), &doc)
    }
}

fn write_json(path: &Path, doc: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}
