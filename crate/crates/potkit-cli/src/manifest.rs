//! Run manifest: enough to rerun a command and reproduce its CSV bodies.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub version: String,
    /// SHA-256 of the canonical TOML form of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub wall_time_ms: u64,
    pub exit_code: i32,
    pub outputs: Vec<String>,
    pub config: ExperimentConfig,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig, wall_time_ms: u64, exit_code: i32, outputs: Vec<String>) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            wall_time_ms,
            exit_code,
            outputs,
            config: cfg.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serialises")
    }

    /// Parses a manifest and checks its hash against the embedded config.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let m: RunManifest = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config_hash(&m.config) != m.config_hash {
            return Err(CliError::Config("manifest hash does not match its config".into()));
        }
        Ok(m)
    }
}
