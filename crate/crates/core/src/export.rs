//! Plot-ready CSV and JSON artefacts.
//!
//! CSV files start with `#`-prefixed metadata lines (schema, version, seed,
//! the full run specification as JSON) followed by a header row. Floats are
//! written in shortest round-trip form so reruns compare byte for byte.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Version tag of the CSV layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Provenance recorded with every artefact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub spec: Value,
}

impl RunMeta {
    pub fn new(command: &str, seed: u64, spec: impl Serialize) -> Self {
        RunMeta {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            spec: serde_json::to_value(spec).expect("specs serialise"),
        }
    }
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes metadata comments, `header`, then `rows`.
pub fn write_csv<W: Write>(mut out: W, meta: &RunMeta, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    writeln!(out, "# schema: {SCHEMA_VERSION}")?;
    writeln!(out, "# command: {}", meta.command)?;
    writeln!(out, "# version: {}", meta.version)?;
    writeln!(out, "# seed: {}", meta.seed)?;
    writeln!(out, "# spec: {}", serde_json::to_string(&meta.spec).expect("json values serialise"))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                got: row.len(),
            });
        }
        w.write_record(row.iter().map(Cell::render)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `{"meta": …, "result": …}` as pretty JSON.
pub fn write_json<W: Write>(mut out: W, meta: &RunMeta, result: impl Serialize) -> Result<()> {
    let doc = serde_json::json!({ "meta": meta, "result": result });
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Parsed CSV artefact.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Reads back a file produced by [`write_csv`].
pub fn read_csv(text: &str) -> Result<CsvTable> {
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once(": ").unwrap_or((rest, ""));
            meta.push((k.to_string(), v.to_string()));
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()).map_err(csv_error))
        .collect::<Result<_>>()?;
    Ok(CsvTable { meta, header, rows })
}
