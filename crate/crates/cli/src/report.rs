//! Run reports: metadata, checked inequalities and free-form data.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    /// Seconds since the Unix epoch; the only field allowed to differ between identical runs.
    pub timestamp: u64,
}

impl Metadata {
    pub fn new(command: &str, seed: u64, threads: usize) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            threads,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// One checked inequality `lhs ≤ rhs + tol`, `tol` absolute. Without both
/// sides the check is flagged as not applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// The result the inequality comes from.
    pub anchor: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub tol: f64,
    pub pass: Option<bool>,
}

impl Record {
    pub fn le(name: &str, anchor: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let mut r = Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            tol,
            pass: None,
        };
        r.pass = r.derive();
        r
    }

    pub fn not_applicable(name: &str, anchor: &str) -> Self {
        Self {
            name: name.to_string(),
            anchor: anchor.to_string(),
            lhs: None,
            rhs: None,
            tol: 0.0,
            pass: None,
        }
    }

    /// Pass status recomputed from the stored sides.
    pub fn derive(&self) -> Option<bool> {
        match (self.lhs, self.rhs) {
            (Some(l), Some(r)) => Some(l <= r + self.tol),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    pub records: Vec<Record>,
    /// CSV tables written next to the report, relative to the output directory.
    pub series: Vec<String>,
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(metadata: Metadata) -> Self {
        Self {
            metadata,
            records: Vec::new(),
            series: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn failures(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.derive() == Some(false))
            .count()
    }

    /// Records whose stored status disagrees with the one derived from their sides.
    pub fn inconsistent(&self) -> usize {
        self.records.iter().filter(|r| r.pass != r.derive()).count()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
    }
}

/// Writes a CSV table with the given header.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
