//! Append-only log of pipeline stages: name, parameters, warnings, and a
//! timestamp per record.

use std::path::Path;

use crate::export::write_atomic;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct StageRecord {
    pub timestamp: String,
    pub stage: String,
    pub params: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

/// Ordered stage records; every pipeline operation appends exactly one.
#[derive(Debug, Default)]
pub struct RunLog {
    records: Vec<StageRecord>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, stage: &str, params: Vec<(String, String)>, warnings: Vec<String>) {
        self.records.push(StageRecord {
            timestamp: chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            stage: stage.to_string(),
            params,
            warnings,
        });
    }

    pub fn records(&self) -> &[StageRecord] {
        &self.records
    }

    /// One line per record, then one indented line per warning. The
    /// timestamp is the first whitespace-separated token so consumers can
    /// strip it when comparing runs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&record.timestamp);
            out.push(' ');
            out.push_str(&record.stage);
            for (key, value) in &record.params {
                out.push_str(&format!(" {key}={value}"));
            }
            out.push('\n');
            for warning in &record.warnings {
                out.push_str(&format!("{} {} warning: {warning}\n", record.timestamp, record.stage));
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, &self.to_text())
    }
}
