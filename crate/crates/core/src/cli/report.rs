use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub name: String,
    pub statistic: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl TestRecord {
    /// Passes when `|statistic - target| <= tolerance`.
    pub fn within(name: impl Into<String>, statistic: f64, target: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            target,
            tolerance,
            pass: (statistic - target).abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub tests: Vec<TestRecord>,
    pub timings: Vec<Timing>,
    pub artifacts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes to JSON");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            config_hash: config_hash(config),
            seed: config.seed,
            tests: Vec::new(),
            timings: Vec::new(),
            artifacts: Vec::new(),
            error: None,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.error.is_none() && self.tests.iter().all(|t| t.pass)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(dir.join("report.json"), text)
    }
}
