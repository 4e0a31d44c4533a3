//! Report envelope, CSV tables, and output writing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version tag of the report JSON layout.
pub const SCHEMA: &str = "ghlab-report/1";

/// Every JSON report: what ran, with which configuration, whether its checks
/// passed, and the command-specific result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub pass: bool,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, config: impl Serialize, pass: bool, result: impl Serialize) -> Result<Self> {
        Ok(Self {
            schema: SCHEMA.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            pass,
            result: serde_json::to_value(result)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Flat rows for CSV output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Input(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

/// What a command produced: the report, its CSV view, and an optional plot.
#[derive(Clone, Debug)]
pub struct Output {
    pub report: Report,
    pub table: Table,
    pub plot: Option<String>,
}

/// Formats a cell value.
pub fn cell(v: impl ToString) -> String {
    v.to_string()
}

/// Writes `text` to `path`, or to stdout when `path` is absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_commas() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n\"x,y\",1\n");
    }

    #[test]
    fn report_embeds_version() {
        let r = Report::new("gh", serde_json::json!({"mode": "exact"}), true, 1.5).unwrap();
        assert_eq!(r.schema, SCHEMA);
        assert_eq!(r.version, env!("CARGO_PKG_VERSION"));
        let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
