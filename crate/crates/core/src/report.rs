//! Run reports: one deterministic JSON document per run, or a CSV table of
//! its items.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const TOOL: &str = "fraisse";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::ParameterOutOfRange(format!("unknown format {s:?}"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// No timings or host data, so equal inputs give equal bytes.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, String>,
    pub outcome: String,
    pub items: Vec<Value>,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            seed,
            parameters: BTreeMap::new(),
            outcome: "complete".into(),
            items: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, item: impl Serialize) -> Result<()> {
        self.items.push(serde_json::to_value(item)?);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per item; columns are the union of top-level item keys, and
    /// nested values are written as compact JSON.
    pub fn to_csv(&self) -> Result<String> {
        let mut columns: Vec<String> = vec!["command".into(), "outcome".into()];
        for item in &self.items {
            if let Value::Object(map) = item {
                for k in map.keys() {
                    if !columns.contains(k) {
                        columns.push(k.clone());
                    }
                }
            }
        }
        columns[2..].sort();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&columns).map_err(csv_error)?;
        for item in &self.items {
            let row: Vec<String> = columns
                .iter()
                .map(|c| match c.as_str() {
                    "command" => self.command.clone(),
                    "outcome" => self.outcome.clone(),
                    key => match item.get(key) {
                        None | Some(Value::Null) => String::new(),
                        Some(Value::String(s)) => s.clone(),
                        Some(v) => v.to_string(),
                    },
                })
                .collect();
            w.write_record(&row).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes `<command>.<ext>` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.{}", self.command, format.extension()));
        fs::write(&path, self.render(format)?)?;
        Ok(path)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid_json() {
        let r = Report::new("ramsey", 0);
        let v: Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["items"], Value::Array(Vec::new()));
        assert_eq!(v["tool"], "fraisse");
    }

    #[test]
    fn csv_columns() {
        let mut r = Report::new("eppa", 1);
        r.push(serde_json::json!({"b": 1, "a": "x,y"})).unwrap();
        r.push(serde_json::json!({"c": [1, 2]})).unwrap();
        let csv = r.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "command,outcome,a,b,c");
        assert_eq!(lines[1], "eppa,complete,\"x,y\",1,");
        assert_eq!(lines[2], "eppa,complete,,,\"[1,2]\"");
    }
}
