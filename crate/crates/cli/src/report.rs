use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

pub const VERSION: &str = concat!("crepant-v", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            value: f64::NAN,
            tolerance: 0.0,
            pass: false,
            note: Some(note.into()),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A coefficient table written as CSV next to the JSON report.
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub data: Value,
    pub error_budget: Option<Value>,
    pub tables: Vec<Table>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: &'static str,
    pub config: RunConfig,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_budget: Option<Value>,
    pub data: Value,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}
