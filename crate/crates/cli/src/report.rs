//! Deterministic JSON reports and CSV tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub seed: u64,
    pub config_hash: String,
    pub tolerances: BTreeMap<String, f64>,
    pub result: serde_json::Value,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

impl Outcome {
    /// Writes `report.json` and `tables/*.csv` under `dir`; returns the
    /// report path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let tables = dir.join("tables");
        std::fs::create_dir_all(&tables).map_err(|e| io_err(&tables, e))?;
        let path = dir.join("report.json");
        let mut json = serde_json::to_string_pretty(&self.report).expect("report serializes");
        json.push('\n');
        std::fs::write(&path, json).map_err(|e| io_err(&path, e))?;
        for t in &self.tables {
            let p = tables.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&p).map_err(|e| io_err(&p, e))?;
            w.write_record(&t.header).map_err(|e| io_err(&p, e))?;
            for r in &t.rows {
                w.write_record(r).map_err(|e| io_err(&p, e))?;
            }
            w.flush().map_err(|e| io_err(&p, e))?;
        }
        Ok(path)
    }
}
