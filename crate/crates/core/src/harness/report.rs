//! Versioned experiment reports: one JSON document plus a flat CSV of measurements.
//!
//! Pass/fail of every record is derived from its own measurements through its
//! conditions, never set by hand.

use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON has no infinities; non-finite numbers are written as `"inf"`, `"-inf"` or `"nan"`.
fn number<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string().to_lowercase())
    }
}

fn rows<S: Serializer>(rows: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a>(#[serde(serialize_with = "cells")] &'a [f64]);
    fn cells<S: Serializer>(r: &&[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(r.iter().map(|v| Cell(*v)))
    }
    struct Cell(f64);
    impl Serialize for Cell {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            number(&self.0, s)
        }
    }
    s.collect_seq(rows.iter().map(|r| Row(r)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "finite")]
    Finite,
}

/// `measurement <op> limit`.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub measurement: String,
    pub comparison: Comparison,
    #[serde(serialize_with = "number")]
    pub limit: f64,
}

impl Condition {
    pub fn at_most(m: &str, limit: f64) -> Self {
        Condition { measurement: m.into(), comparison: Comparison::AtMost, limit }
    }

    pub fn below(m: &str, limit: f64) -> Self {
        Condition { measurement: m.into(), comparison: Comparison::Below, limit }
    }

    pub fn at_least(m: &str, limit: f64) -> Self {
        Condition { measurement: m.into(), comparison: Comparison::AtLeast, limit }
    }

    pub fn finite(m: &str) -> Self {
        Condition { measurement: m.into(), comparison: Comparison::Finite, limit: f64::NAN }
    }

    fn holds(&self, value: f64) -> bool {
        match self.comparison {
            Comparison::AtMost => value <= self.limit,
            Comparison::Below => value < self.limit,
            Comparison::AtLeast => value >= self.limit,
            Comparison::Finite => value.is_finite(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub name: String,
    #[serde(serialize_with = "number")]
    pub value: f64,
}

/// One named check with its measurements and the conditions they must satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub config_hash: String,
    pub measurements: Vec<Measurement>,
    pub conditions: Vec<Condition>,
    pub passed: bool,
    /// Free-form context (domains, corpus identifiers, worst offender).
    pub detail: String,
}

impl CheckRecord {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.name == name).map(|m| m.value)
    }
}

/// Accumulates measurements and conditions, then evaluates them.
#[derive(Debug)]
pub struct RecordBuilder {
    name: String,
    measurements: Vec<Measurement>,
    conditions: Vec<Condition>,
    detail: String,
}

impl RecordBuilder {
    pub fn new(name: &str) -> Self {
        RecordBuilder { name: name.into(), measurements: Vec::new(), conditions: Vec::new(), detail: String::new() }
    }

    pub fn measure(mut self, name: &str, value: f64) -> Self {
        self.measurements.push(Measurement { name: name.into(), value });
        self
    }

    pub fn require(mut self, c: Condition) -> Self {
        self.conditions.push(c);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn finish(self, config_hash: &str) -> CheckRecord {
        let passed = self.conditions.iter().all(|c| {
            self.measurements.iter().find(|m| m.name == c.measurement).is_some_and(|m| c.holds(m.value))
        });
        CheckRecord {
            name: self.name,
            config_hash: config_hash.into(),
            measurements: self.measurements,
            conditions: self.conditions,
            passed,
            detail: self.detail,
        }
    }
}

/// A rectangular table of numbers, e.g. a convergence study or a ratio matrix.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(serialize_with = "rows")]
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub suite: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub records: Vec<CheckRecord>,
    pub tables: Vec<Table>,
    /// Excluded from the deterministic payload.
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    /// JSON of everything except the wall clock; identical for identical configs.
    pub fn payload(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        v.as_object_mut().expect("report is an object").remove("wall_clock_seconds");
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn file_stem(&self) -> String {
        format!("{}-{}", self.suite, self.config_hash)
    }

    /// Writes `<suite>-<hash>.json` and `<suite>-<hash>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
        let json = dir.join(format!("{}.json", self.file_stem()));
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&json, text).map_err(|source| Error::Io { path: json.clone(), source })?;
        let csv_path = dir.join(format!("{}.csv", self.file_stem()));
        let mut w = csv::Writer::from_path(&csv_path)?;
        w.write_record(["schema_version", "suite", "config_hash", "record", "measurement", "value", "passed"])?;
        for r in &self.records {
            for m in &r.measurements {
                w.write_record([
                    SCHEMA_VERSION.to_string(),
                    self.suite.clone(),
                    self.config_hash.clone(),
                    r.name.clone(),
                    m.name.clone(),
                    format!("{:e}", m.value),
                    r.passed.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|source| Error::Io { path: csv_path.clone(), source })?;
        Ok((json, csv_path))
    }
}
