//! Fine-tuning data export and job description.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mock::format_list;
use super::{ChatMessage, Role};
use crate::adapters::prompts::{PromptAsset, PromptId};
use crate::corpus::{Corpus, Side, SplitAssignment};

#[derive(Debug, Error)]
pub enum FinetuneError {
    #[error("no eligible samples on the {0:?} side")]
    NoEligibleSamples(Side),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: {message}")]
    InvalidJsonl { path: String, line: usize, message: String },
    #[error("invalid fine-tune config: {0}")]
    InvalidConfig(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FinetuneError + '_ {
    move |source| FinetuneError::Io { path: path.display().to_string(), source }
}

/// One line of the fine-tuning file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub messages: Vec<ChatMessage>,
}

impl FinetuneRecord {
    pub fn new(source: &[String], target: &[String]) -> Self {
        Self {
            messages: vec![
                ChatMessage::system(PromptAsset::get(PromptId::System).text),
                ChatMessage::user(format_list(source)),
                ChatMessage::assistant(format_list(target)),
            ],
        }
    }

    fn check(&self) -> Result<(), String> {
        let roles: Vec<Role> = self.messages.iter().map(|m| m.role).collect();
        if roles != [Role::System, Role::User, Role::Assistant] {
            return Err(format!("expected system/user/assistant messages, found {roles:?}"));
        }
        if self.messages.iter().any(|m| m.content.is_empty()) {
            return Err("empty message content".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub records: usize,
    pub skipped_unaligned: usize,
}

/// Write one chat record per aligned (abstract, adaptation) sample on `side`.
pub fn export_finetune_jsonl(corpus: &Corpus, split: &SplitAssignment, side: Side, out: impl AsRef<Path>) -> Result<ExportSummary, FinetuneError> {
    let out = out.as_ref();
    let wanted: std::collections::HashSet<_> = split.sample_ids(side).iter().collect();
    let mut records = Vec::new();
    let mut skipped_unaligned = 0;
    for sample in corpus.samples() {
        if !wanted.contains(&sample.id()) {
            continue;
        }
        if !sample.is_aligned() {
            skipped_unaligned += 1;
            continue;
        }
        records.push(FinetuneRecord::new(&sample.abstract_sample.source_sentences, &sample.adaptation.target_sentences));
    }
    if skipped_unaligned > 0 {
        log::warn!("skipped {skipped_unaligned} unaligned adaptation(s)");
    }
    if records.is_empty() {
        return Err(FinetuneError::NoEligibleSamples(side));
    }
    let mut w = BufWriter::new(File::create(out).map_err(io_err(out))?);
    for r in &records {
        let line = serde_json::to_string(r).expect("record serializes");
        w.write_all(line.as_bytes()).map_err(io_err(out))?;
        w.write_all(b"\n").map_err(io_err(out))?;
    }
    w.flush().map_err(io_err(out))?;
    Ok(ExportSummary { records: records.len(), skipped_unaligned })
}

/// Parse and check a chat JSONL file; returns its records.
pub fn read_finetune_jsonl(path: impl AsRef<Path>) -> Result<Vec<FinetuneRecord>, FinetuneError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| FinetuneError::InvalidJsonl { path: path.display().to_string(), line: i + 1, message };
        let record: FinetuneRecord = serde_json::from_str(&line).map_err(|e| invalid(e.to_string()))?;
        record.check().map_err(invalid)?;
        out.push(record);
    }
    if out.is_empty() {
        return Err(FinetuneError::InvalidJsonl { path: path.display().to_string(), line: 0, message: "no records".into() });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub model: String,
    pub epochs: u32,
    pub batch_size: u32,
    pub lr_multiplier: f64,
    pub random_seed: u64,
    pub training_file: PathBuf,
    pub validation_file: Option<PathBuf>,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        Self {
            model: "gpt-4o-mini-2024-07-18".into(),
            epochs: 3,
            batch_size: 1,
            lr_multiplier: 2.0,
            random_seed: 741_667_963,
            training_file: PathBuf::from("train.jsonl"),
            validation_file: Some(PathBuf::from("validation.jsonl")),
        }
    }
}

impl FinetuneConfig {
    pub fn validate(&self) -> Result<(), FinetuneError> {
        if self.model.trim().is_empty() {
            return Err(FinetuneError::InvalidConfig("model must be set".into()));
        }
        if self.epochs == 0 {
            return Err(FinetuneError::InvalidConfig("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(FinetuneError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.lr_multiplier > 0.0 && self.lr_multiplier.is_finite()) {
            return Err(FinetuneError::InvalidConfig("lr_multiplier must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub n_epochs: u32,
    pub batch_size: u32,
    pub learning_rate_multiplier: f64,
}

/// Provider job description (fine-tuning jobs endpoint body).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneJobPayload {
    pub model: String,
    pub training_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation_file: Option<String>,
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
}

impl FinetuneJobPayload {
    pub fn to_config(&self) -> FinetuneConfig {
        FinetuneConfig {
            model: self.model.clone(),
            epochs: self.hyperparameters.n_epochs,
            batch_size: self.hyperparameters.batch_size,
            lr_multiplier: self.hyperparameters.learning_rate_multiplier,
            random_seed: self.seed,
            training_file: PathBuf::from(&self.training_file),
            validation_file: self.validation_file.as_ref().map(PathBuf::from),
        }
    }
}

/// Validate the config and its data files, then describe the job.
pub fn build_finetune_job(config: &FinetuneConfig) -> Result<FinetuneJobPayload, FinetuneError> {
    config.validate()?;
    read_finetune_jsonl(&config.training_file)?;
    if let Some(v) = &config.validation_file {
        read_finetune_jsonl(v)?;
    }
    Ok(FinetuneJobPayload {
        model: config.model.clone(),
        training_file: config.training_file.display().to_string(),
        validation_file: config.validation_file.as_ref().map(|p| p.display().to_string()),
        seed: config.random_seed,
        hyperparameters: Hyperparameters {
            n_epochs: config.epochs,
            batch_size: config.batch_size,
            learning_rate_multiplier: config.lr_multiplier,
        },
    })
}

/// Losses reported by a provider for a finished job. Reference metadata only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinetuneOutcome {
    pub job_id: String,
    pub training_loss: Option<f64>,
    pub full_validation_loss: Option<f64>,
}

/// Published losses of the original gpt-4o / gpt-4o-mini tuning runs.
pub fn published_outcome(base_model: &str) -> Option<FinetuneOutcome> {
    let (training, validation) = match base_model {
        m if m.starts_with("gpt-4o-mini") => (1.0489, 0.967),
        m if m.starts_with("gpt-4o") => (1.099, 0.8336),
        _ => return None,
    };
    Some(FinetuneOutcome { job_id: "published".into(), training_loss: Some(training), full_validation_loss: Some(validation) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{split_corpus, AbstractSample, AdaptationReference};

    fn corpus() -> Corpus {
        Corpus::new(vec![
            AbstractSample {
                pmid: "1".into(),
                question_id: "q".into(),
                question: None,
                source_sentences: vec!["Orthoses help.".into(), "Blood pressure was measured.".into()],
                adaptations: vec![
                    AdaptationReference { adaptation_id: "1".into(), target_sentences: vec!["Braces help.".into(), "".into()] },
                    AdaptationReference { adaptation_id: "2".into(), target_sentences: vec!["Braces help.".into()] },
                ],
            },
        ])
    }

    #[test]
    fn one_aligned_sample_one_line() {
        let c = corpus();
        let split = split_corpus(&c, 0.5, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("train.jsonl");
        let summary = export_finetune_jsonl(&c, &split, Side::Train, &out).unwrap();
        assert_eq!(summary, ExportSummary { records: 1, skipped_unaligned: 1 });
        let records = read_finetune_jsonl(&out).unwrap();
        assert_eq!(records.len(), 1);
        let roles: Vec<Role> = records[0].messages.iter().map(|m| m.role).collect();
        assert_eq!(roles, [Role::System, Role::User, Role::Assistant]);
        assert_eq!(records[0].messages[2].content, r#"["Braces help.", ""]"#);
    }

    #[test]
    fn empty_side_is_an_error() {
        let c = corpus();
        let split = split_corpus(&c, 0.5, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = export_finetune_jsonl(&c, &split, Side::Validation, dir.path().join("v.jsonl")).unwrap_err();
        assert!(matches!(err, FinetuneError::NoEligibleSamples(Side::Validation)));
    }

    #[test]
    fn defaults_match_published_hyperparameters() {
        let c = FinetuneConfig::default();
        assert_eq!((c.epochs, c.batch_size, c.lr_multiplier, c.random_seed), (3, 1, 2.0, 741_667_963));
    }

    #[test]
    fn zero_epochs_rejected() {
        let c = FinetuneConfig { epochs: 0, ..Default::default() };
        assert!(matches!(build_finetune_job(&c), Err(FinetuneError::InvalidConfig(_))));
    }

    #[test]
    fn missing_training_file() {
        let c = FinetuneConfig { training_file: "/nonexistent/t.jsonl".into(), validation_file: None, ..Default::default() };
        assert!(matches!(build_finetune_job(&c), Err(FinetuneError::Io { .. })));
    }

    #[test]
    fn invalid_jsonl_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.jsonl");
        std::fs::write(&p, "{\"messages\": [{\"role\": \"user\", \"content\": \"x\"}]}\n").unwrap();
        assert!(matches!(read_finetune_jsonl(&p), Err(FinetuneError::InvalidJsonl { line: 1, .. })));
    }

    #[test]
    fn published_losses() {
        assert_eq!(published_outcome("gpt-4o-2024-08-06").unwrap().training_loss, Some(1.099));
        assert_eq!(published_outcome("gpt-4o-mini-2024-07-18").unwrap().full_validation_loss, Some(0.967));
        assert!(published_outcome("llama").is_none());
    }
}
