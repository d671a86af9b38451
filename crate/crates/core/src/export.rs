//! Plain CSV tables with `#`-prefixed metadata lines.
//!
//! Floats are written with Rust's shortest round-trip exponent format, so a
//! table written twice from the same data is byte-identical.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            comments: Vec::new(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::invalid(
                "row",
                format!("{} values for {} columns", row.len(), self.header.len()),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            for line in c.lines() {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.render().as_bytes())?;
        Ok(())
    }
}

/// Parse a table produced by [`CsvTable::render`].
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut table = CsvTable::default();
    let mut have_header = false;
    for line in text.lines() {
        if let Some(c) = line.strip_prefix('#') {
            table.comments.push(c.trim_start().to_string());
        } else if !have_header {
            table.header = line.split(',').map(str::to_string).collect();
            have_header = true;
        } else if !line.is_empty() {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::invalid("csv", e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            table.push(row)?;
        }
    }
    Ok(table)
}
