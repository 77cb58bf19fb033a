//! Optional TOML config. Every key mirrors a flag; a flag given on the
//! command line always wins.
//!
//! ```toml
//! model = "gpt-4o-mini-2024-07-18"
//! seed = 42
//! ratio = 0.8
//! backend = "http"
//! concurrency = 4
//! rounds = 1
//! repair_attempts = 2
//! temperature = 0.0
//! max_retries = 5
//! timeout_secs = 120
//!
//! [finetune]
//! epochs = 3
//! batch_size = 1
//! lr_multiplier = 2.0
//! seed = 741667963
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io, CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub ratio: Option<f64>,
    pub backend: Option<String>,
    pub concurrency: Option<usize>,
    pub rounds: Option<u32>,
    pub repair_attempts: Option<u32>,
    pub temperature: Option<f64>,
    pub max_retries: Option<u32>,
    pub timeout_secs: Option<u64>,
    #[serde(default)]
    pub finetune: FinetuneSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinetuneSection {
    pub model: Option<String>,
    pub epochs: Option<u32>,
    pub batch_size: Option<u32>,
    pub lr_multiplier: Option<f64>,
    pub seed: Option<u64>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(io(path))?;
        toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let doc = include_str!("config.rs");
        let example: String = doc
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .collect::<Vec<_>>()
            .join("\n");
        let c: Config = toml::from_str(&example).unwrap();
        assert_eq!(c.finetune.seed, Some(741_667_963));
        assert_eq!(c.ratio, Some(0.8));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Config>("modle = \"x\"").is_err());
    }
}
