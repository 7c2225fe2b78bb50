//! Tabular reports with CSV and JSON emitters.
//!
//! A report is a fixed column list plus flat records. CSV output holds only
//! the header and the records, so identical runs give identical bytes; the
//! run metadata travels in JSON output or in a `<file>.meta.json` sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Verdicts {
    pub fn record(&mut self, pass: bool) {
        self.checked += 1;
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    pub version: String,
    pub columns: Vec<String>,
    pub seed: Option<u64>,
    pub caps: Map<String, Value>,
    /// Present when the command runs verifiers.
    pub verdicts: Option<Verdicts>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub records: Vec<Map<String, Value>>,
}

impl Report {
    pub fn new(command: impl Into<String>, columns: &[&str]) -> Self {
        Report {
            meta: Meta {
                command: command.into(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                columns: columns.iter().map(|c| c.to_string()).collect(),
                seed: None,
                caps: Map::new(),
                verdicts: None,
                elapsed_seconds: 0.0,
            },
            records: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.meta.columns
    }

    /// Appends a record. It must serialize to an object whose keys are
    /// exactly the report's columns.
    pub fn push<T: Serialize>(&mut self, record: &T) -> Result<()> {
        let value = serde_json::to_value(record).map_err(|e| Error::Format(e.to_string()))?;
        let Value::Object(map) = value else {
            return Err(Error::Format("record is not an object".into()));
        };
        let keys: Vec<&String> = map.keys().collect();
        if keys.len() != self.meta.columns.len() || self.meta.columns.iter().any(|c| !map.contains_key(c)) {
            return Err(Error::Format(format!(
                "record keys {keys:?} do not match columns {:?}",
                self.meta.columns
            )));
        }
        let ordered = self
            .meta
            .columns
            .iter()
            .map(|c| (c.clone(), map[c].clone()))
            .collect();
        self.records.push(ordered);
        Ok(())
    }

    /// Records a verifier outcome in the verdict summary.
    pub fn verdict(&mut self, pass: bool) {
        self.meta
            .verdicts
            .get_or_insert_with(Verdicts::default)
            .record(pass);
    }

    pub fn all_passed(&self) -> bool {
        self.meta.verdicts.as_ref().map_or(true, Verdicts::all_passed)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(&self.meta.columns).map_err(fmt)?;
        for r in &self.records {
            w.write_record(self.meta.columns.iter().map(|c| cell(&r[c])))
                .map_err(fmt)?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn emit(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes the report; CSV also gets a `.meta.json` sidecar.
    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        let out = |p: &Path, bytes: &[u8]| {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| output_error(p, e))?;
            }
            fs::write(p, bytes).map_err(|e| output_error(p, e))
        };
        out(path, &self.emit(format)?)?;
        if format == Format::Csv {
            let meta = serde_json::to_vec_pretty(&self.meta).map_err(|e| Error::Format(e.to_string()))?;
            out(&sidecar_path(path), &meta)?;
        }
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn output_error(p: &Path, e: std::io::Error) -> Error {
    Error::Output {
        path: p.display().to_string(),
        reason: e.to_string(),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("phase", &["alpha", "h"]);
        assert_eq!(r.to_csv().unwrap(), b"alpha,h\n");
    }

    #[test]
    fn cells_and_quoting() {
        let mut r = Report::new("x", &["a", "b", "c"]);
        r.push(&json!({"c": "p,q", "a": 0.1, "b": null})).unwrap();
        assert_eq!(
            String::from_utf8(r.to_csv().unwrap()).unwrap(),
            "a,b,c\n0.1,,\"p,q\"\n"
        );
        assert!(r.push(&json!({"a": 1})).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("x", &["a", "b"]);
        r.push(&json!({"a": 1e-17, "b": "unique"})).unwrap();
        r.push(&json!({"a": -3.0000000000000004, "b": null})).unwrap();
        r.verdict(true);
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
