//! One manifest per artifact-producing command, written as `<output>.manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{io, Result};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub input_hashes: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub prompt_asset_hashes: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub seeds: BTreeMap<String, u64>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub summary: Value,
}

impl RunManifest {
    pub fn start(command: &str, config: impl Serialize) -> Self {
        let now = Utc::now();
        Self {
            command: command.to_string(),
            config: serde_json::to_value(config).expect("config serializes"),
            input_hashes: BTreeMap::new(),
            prompt_asset_hashes: BTreeMap::new(),
            seeds: BTreeMap::new(),
            started_at: now,
            finished_at: now,
            outputs: Vec::new(),
            summary: Value::Null,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(io(path))?;
        self.input_hashes.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    pub fn prompts(&mut self) {
        self.prompt_asset_hashes =
            plainlang::adapters::prompts::asset_hashes().into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    }

    /// Finish and write next to `primary` (the command's main output).
    pub fn write(mut self, primary: &Path) -> Result<PathBuf> {
        self.finished_at = Utc::now();
        if !self.outputs.iter().any(|p| p == primary) {
            self.outputs.insert(0, primary.to_path_buf());
        }
        let path = manifest_path(primary);
        let body = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, body + "\n").map_err(io(&path))?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    primary.with_file_name(name)
}
