//! Where and how tables are written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use rgg_entropy::export::{write_csv, write_json, Cell, RunMeta};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A header plus rows, as emitted by most subcommands.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (h, c) in self.header.iter().zip(row) {
                        let v = match c {
                            Cell::Num(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
                            Cell::Int(i) => Value::from(*i),
                            Cell::Text(s) => Value::from(s.clone()),
                        };
                        obj.insert(h.to_string(), v);
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

pub fn emit_table(path: Option<&Path>, format: Format, meta: &RunMeta, table: &Table) -> Result<()> {
    let mut out = sink(path)?;
    match format {
        Format::Csv => write_csv(&mut out, meta, &table.header, &table.rows)?,
        Format::Json => write_json(&mut out, meta, table.to_json())?,
    }
    out.flush()?;
    Ok(())
}

pub fn emit_json(path: Option<&Path>, meta: &RunMeta, value: impl serde::Serialize) -> Result<()> {
    let mut out = sink(path)?;
    write_json(&mut out, meta, value)?;
    out.flush()?;
    Ok(())
}
