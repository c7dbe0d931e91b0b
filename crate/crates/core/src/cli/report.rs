use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};

/// One pass/fail predicate `value <= limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, pass: value <= limit }
    }

    /// Boolean predicate recorded as `0 <= 0` or `1 <= 0`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

/// Plot-ready rows; cells are already formatted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip rendering of a float for tables.
pub fn cell(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub version: String,
    pub modules: BTreeMap<String, String>,
    pub seed: u64,
    pub config: BTreeMap<String, Json>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub results: Json,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    /// Present only when the configuration asks for timing; reports with
    /// it are not byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Writes the report as pretty JSON.
pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()?)?;
    Ok(())
}

/// Writes the report's table as CSV.
pub fn emit_csv(report: &Report, path: &Path) -> Result<()> {
    let table = report
        .table
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} reports have no table to extract", report.experiment)))?;
    std::fs::write(path, table.to_csv())?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<Report> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut t = Table::new(&["m", "w1", "self", "debiased", "bound", "pass"]);
        t.push(vec!["10".into(), cell(0.25), cell(0.2), cell(0.05), cell(0.1), "true".into()]);
        Report {
            experiment: "w1-compare".into(),
            version: "0.1.0".into(),
            modules: BTreeMap::from([("transport".into(), "0.1.0".into())]),
            seed: 7,
            config: BTreeMap::from([("n".into(), Json::from(10))]),
            pass: true,
            checks: vec![Check::at_most("debiased <= bound + 4 se", 0.05, 0.1)],
            results: serde_json::json!({"rows": [1, 2]}),
            table: Some(t),
            wall_clock_seconds: None,
        }
    }

    #[test]
    fn round_trip_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let p = dir.path().join("r.json");
        emit_report(&r, &p).unwrap();
        assert_eq!(read_report(&p).unwrap(), r);
        let c = dir.path().join("r.csv");
        emit_csv(&r, &c).unwrap();
        let text = std::fs::read_to_string(&c).unwrap();
        assert!(text.starts_with("m,w1,self,debiased,bound,pass\n10,0.25,"));
        let first = std::fs::read(&p).unwrap();
        emit_report(&r, &p).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), first);
    }

    #[test]
    fn io_errors_surface() {
        let r = sample();
        assert!(matches!(emit_report(&r, Path::new("/nonexistent/dir/r.json")), Err(Error::Io(_))));
        let mut no_table = r;
        no_table.table = None;
        assert!(emit_csv(&no_table, Path::new("/tmp/never.csv")).is_err());
    }
}
