//! CSV and JSON writers. Every CSV starts with a `#` comment line carrying
//! the artifact version and config hash, followed by the header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::HarnessError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A CSV table with string cells, written in row order.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn provenance_line(config_hash: &str) -> String {
    format!("# dfs-scout {VERSION} config={config_hash}")
}

pub fn write_csv(
    dir: &Path,
    name: &str,
    table: &Table,
    config_hash: &str,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(name);
    let mut out = BufWriter::new(File::create(&path)?);
    writeln!(out, "{}", provenance_line(config_hash))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
) -> Result<PathBuf, HarnessError> {
    let path = dir.join(name);
    let mut out = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(path)
}

/// Shortest round-trip decimal form; empty for `None`.
pub fn num(x: impl Into<Option<f64>>) -> String {
    match x.into() {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

pub fn int(x: impl std::fmt::Display) -> String {
    x.to_string()
}
