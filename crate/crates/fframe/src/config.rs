use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Everything that determines a run. Echoed verbatim into every output so a
/// file can be reproduced from its own header.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ifs: Option<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<String>,
    pub params: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(subcommand: &str) -> Self {
        ExperimentConfig {
            subcommand: subcommand.to_string(),
            ifs: None,
            measures: Vec::new(),
            params: BTreeMap::new(),
            seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameters serialize"),
        );
        self
    }

    pub fn compact_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Run facts that vary between otherwise identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub timestamp_unix: u64,
    pub version: &'static str,
    pub out_dir: String,
}

impl RunMetadata {
    pub fn now(out_dir: &str) -> Self {
        RunMetadata {
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            version: env!("CARGO_PKG_VERSION"),
            out_dir: out_dir.to_string(),
        }
    }
}
