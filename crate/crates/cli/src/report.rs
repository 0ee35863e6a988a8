//! Experiment reports. Every metric carries the hash of the configuration
//! that produced it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the canonical JSON of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)[..16].to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub label: String,
    pub config_hash: String,
    /// `None` on success; the solver diagnostic otherwise.
    pub error: Option<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn new(label: impl Into<String>, config_hash: String) -> Self {
        RunReport { label: label.into(), config_hash, error: None, metrics: BTreeMap::new() }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn failed(label: impl Into<String>, config_hash: String, err: impl ToString) -> Self {
        RunReport { error: Some(err.to_string()), ..Self::new(label, config_hash) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.to_string(), value, threshold, pass: value <= threshold }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.to_string(), value, threshold, pass: value >= threshold }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config_hash: String,
    /// The resolved configuration, tolerances included.
    pub config: serde_json::Value,
    pub runs: Vec<RunReport>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrated_c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_c: Option<f64>,
}

impl ExperimentReport {
    pub fn new<T: Serialize>(name: impl Into<String>, config: &T) -> Self {
        ExperimentReport {
            name: name.into(),
            config_hash: config_hash(config),
            config: serde_json::to_value(config).expect("config serializes"),
            runs: Vec::new(),
            checks: Vec::new(),
            calibrated_c0: None,
            fitted_c: None,
        }
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&serde_json::json!({"delta": 0.01}));
        assert_eq!(a, config_hash(&serde_json::json!({"delta": 0.01})));
        assert_ne!(a, config_hash(&serde_json::json!({"delta": 0.02})));
        assert_eq!(a.len(), 16);
    }
}
