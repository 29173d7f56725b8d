//! CSV tables stamped with the configuration hash.
//!
//! Every file starts with a `# config_sha256: <hex>` comment line, then a
//! header row. Floats are written in shortest round-trip exponent form so
//! that identical inputs give identical bytes.

use std::path::Path;

use crate::error::{Error, Result};

/// A header plus string cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub config_hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Formats a float for a table cell.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

impl Table {
    pub fn new(config_hash: &str, header: &[&str]) -> Self {
        Self { config_hash: config_hash.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Appends a long-format `(time, name, value)` row.
    pub fn push_long(&mut self, time: f64, name: impl Into<String>, value: f64) {
        self.push(vec![num(time), name.into(), num(value)]);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = format!("# config_sha256: {}\n", self.config_hash).into_bytes();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_error)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_error)?;
        }
        out.extend(w.into_inner().map_err(|e| Error::Io(e.into_error()))?);
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let config_hash = first
            .strip_prefix("# config_sha256:")
            .ok_or_else(|| Error::Config { path: ".".into(), message: "missing config_sha256 comment line".into() })?
            .trim()
            .to_string();
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
        let header = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error)?;
        Ok(Self { config_hash, header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::parse(&text)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config { path: name.into(), message: "column not found".into() })
    }

    /// Parses a numeric column.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|e| Error::Config { path: name.into(), message: format!("{}: {e}", r[c]) })
            })
            .collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}
