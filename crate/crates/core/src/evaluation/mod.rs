//! Quantitative and human evaluation of adaptation runs.
//!
//! Readability reports score each sample's reconstructed document with FK and
//! SMOG; comparisons pair two reports by sample id and run a paired t-test per
//! metric. Likert and TREC aggregation live in their own submodules.

mod likert;
mod report;
mod trec;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapters::AdaptationResult;
use crate::corpus::{join_sentences, Corpus, SampleId, Side, SplitAssignment};
use crate::readability::{score_text, ReadabilityError};
use crate::stats::{mean_sd, paired_t_test, StatsError, SummaryStat, TTestResult};

pub use likert::{aggregate_likert, read_ratings_jsonl, Dimension, LikertRating, LikertSummary};
pub use report::{emit_report, Table1Row, Table2Row, ReportBundle, ReportFormat, REPORT_SCHEMA_VERSION};
pub use trec::{trec_score, TrecCategory, TrecScore, TrecSentenceRating, TREC_MAPPING};

/// Default size of the human-rated sample.
pub const DEFAULT_QUALITATIVE_SAMPLE: usize = 40;

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("unknown sample id {0}")]
    UnknownSample(SampleId),
    #[error("{sample_id}: {source}")]
    Readability { sample_id: SampleId, source: ReadabilityError },
    #[error("report {0:?} has no scorable documents")]
    NoScorableDocuments(String),
    #[error("report {system_id:?} is inconsistent: {message}")]
    Inconsistent { system_id: String, message: String },
    #[error("sample ids differ between reports ({only_left} only in {left:?}, {only_right} only in {right:?})")]
    IdMismatch { left: String, right: String, only_left: usize, only_right: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid rating: {0}")]
    InvalidRating(String),
    #[error("no ratings for system {0:?}")]
    NoRatings(String),
    #[error("no TREC ratings for category {0:?}")]
    MissingCategory(TrecCategory),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("nothing to report")]
    NothingToReport,
    #[error("cannot draw {n} samples from a pool of {pool}")]
    SampleTooLarge { n: usize, pool: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub sample_id: SampleId,
    pub fk_grade: f64,
    pub smog_index: f64,
    pub smog_low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub fk_grade: SummaryStat,
    pub smog_index: SummaryStat,
    pub smog_low_confidence_count: usize,
}

impl MetricSummary {
    fn compute(rows: &[DocumentScore]) -> Result<Self, StatsError> {
        let fk: Vec<f64> = rows.iter().map(|d| d.fk_grade).collect();
        let smog: Vec<f64> = rows.iter().map(|d| d.smog_index).collect();
        Ok(Self {
            fk_grade: mean_sd(&fk)?,
            smog_index: mean_sd(&smog)?,
            smog_low_confidence_count: rows.iter().filter(|d| d.smog_low_confidence).count(),
        })
    }
}

/// Per-document scores of one system plus their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityReport {
    pub system_id: String,
    pub per_document: Vec<DocumentScore>,
    /// Samples whose every sentence was omitted; never scored.
    #[serde(default)]
    pub excluded_empty: Vec<SampleId>,
    pub summary: MetricSummary,
}

impl ReadabilityReport {
    /// Score pre-joined documents.
    pub fn from_documents(system_id: impl Into<String>, documents: &BTreeMap<SampleId, Vec<String>>) -> Result<Self, EvaluationError> {
        let system_id = system_id.into();
        let mut per_document = Vec::with_capacity(documents.len());
        let mut excluded_empty = Vec::new();
        for (sample_id, sentences) in documents {
            let text = join_sentences(sentences);
            if text.is_empty() {
                excluded_empty.push(sample_id.clone());
                continue;
            }
            let score = score_text(&text).map_err(|source| EvaluationError::Readability { sample_id: sample_id.clone(), source })?;
            per_document.push(DocumentScore {
                sample_id: sample_id.clone(),
                fk_grade: score.fk_grade,
                smog_index: score.smog_index,
                smog_low_confidence: score.smog_low_confidence,
            });
        }
        if !excluded_empty.is_empty() {
            log::warn!("{system_id}: {} document(s) empty after omissions, excluded", excluded_empty.len());
        }
        if per_document.is_empty() {
            return Err(EvaluationError::NoScorableDocuments(system_id));
        }
        let summary = MetricSummary::compute(&per_document)?;
        Ok(Self { system_id, per_document, excluded_empty, summary })
    }

    /// Build a report from already-computed rows.
    pub fn from_scores(system_id: impl Into<String>, per_document: Vec<DocumentScore>) -> Result<Self, EvaluationError> {
        let system_id = system_id.into();
        if per_document.is_empty() {
            return Err(EvaluationError::NoScorableDocuments(system_id));
        }
        let summary = MetricSummary::compute(&per_document)?;
        Ok(Self { system_id, per_document, excluded_empty: Vec::new(), summary })
    }

    /// Recompute the summary from the rows and compare.
    pub fn check_consistency(&self) -> Result<(), EvaluationError> {
        let inconsistent = |message: String| EvaluationError::Inconsistent { system_id: self.system_id.clone(), message };
        let recomputed = MetricSummary::compute(&self.per_document).map_err(|e| inconsistent(e.to_string()))?;
        let close = |a: &SummaryStat, b: &SummaryStat| a.n == b.n && (a.mean - b.mean).abs() <= 1e-9 && (a.sd - b.sd).abs() <= 1e-9;
        if !close(&recomputed.fk_grade, &self.summary.fk_grade) {
            return Err(inconsistent(format!("FK summary {:?} != recomputed {:?}", self.summary.fk_grade, recomputed.fk_grade)));
        }
        if !close(&recomputed.smog_index, &self.summary.smog_index) {
            return Err(inconsistent(format!("SMOG summary {:?} != recomputed {:?}", self.summary.smog_index, recomputed.smog_index)));
        }
        if recomputed.smog_low_confidence_count != self.summary.smog_low_confidence_count {
            return Err(inconsistent("low-confidence count differs".into()));
        }
        Ok(())
    }

    pub fn covered_ids(&self) -> BTreeSet<&SampleId> {
        self.per_document.iter().map(|d| &d.sample_id).chain(&self.excluded_empty).collect()
    }
}

/// Score a run: every sample id must exist in the corpus.
pub fn score_run(system_id: &str, adapted: &BTreeMap<SampleId, Vec<String>>, corpus: &Corpus) -> Result<ReadabilityReport, EvaluationError> {
    if let Some(unknown) = adapted.keys().find(|id| corpus.sample(id).is_none()) {
        return Err(EvaluationError::UnknownSample(unknown.clone()));
    }
    ReadabilityReport::from_documents(system_id, adapted)
}

pub fn documents_from_results(results: &[AdaptationResult]) -> BTreeMap<SampleId, Vec<String>> {
    results.iter().map(|r| (r.sample_id.clone(), r.adapted_sentences.clone())).collect()
}

/// Gold adaptations of every sample on one side of the split.
pub fn ground_truth_documents(corpus: &Corpus, split: &SplitAssignment, side: Side) -> BTreeMap<SampleId, Vec<String>> {
    let wanted: BTreeSet<&SampleId> = split.sample_ids(side).iter().collect();
    corpus
        .samples()
        .filter(|s| wanted.contains(&s.id()))
        .map(|s| (s.id(), s.adaptation.target_sentences.clone()))
        .collect()
}

/// Source abstract of every sample on one side, keyed by sample id so it pairs
/// with adaptation reports.
pub fn source_documents(corpus: &Corpus, split: &SplitAssignment, side: Side) -> BTreeMap<SampleId, Vec<String>> {
    let wanted: BTreeSet<&SampleId> = split.sample_ids(side).iter().collect();
    corpus
        .samples()
        .filter(|s| wanted.contains(&s.id()))
        .map(|s| (s.id(), s.abstract_sample.source_sentences.clone()))
        .collect()
}

/// Paired comparison of one metric. `test` is `None` when the paired
/// differences have zero variance (e.g. a system compared with itself).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub system_mean: f64,
    pub reference_mean: f64,
    pub delta_mean: f64,
    pub test: Option<TTestResult>,
    pub degenerate: bool,
}

impl MetricComparison {
    pub fn p_display(&self) -> String {
        self.test.map_or_else(|| "n/a".to_string(), |t| t.p_display())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub system_id: String,
    pub reference_id: String,
    pub n_pairs: usize,
    pub fk_grade: MetricComparison,
    pub smog_index: MetricComparison,
}

fn compare_metric(system: &[f64], reference: &[f64]) -> Result<MetricComparison, EvaluationError> {
    let s = mean_sd(system)?.mean;
    let r = mean_sd(reference)?.mean;
    let (test, degenerate) = match paired_t_test(system, reference) {
        Ok(t) => (Some(t), false),
        Err(StatsError::ZeroVariance) => (None, true),
        Err(e) => return Err(e.into()),
    };
    Ok(MetricComparison { system_mean: s, reference_mean: r, delta_mean: s - r, test, degenerate })
}

/// Paired t-tests of `system` against `reference`, matched on sample id.
///
/// Both reports must cover the same ids; documents excluded as empty on
/// either side drop out of the pairing.
pub fn compare_to_ground_truth(system: &ReadabilityReport, reference: &ReadabilityReport) -> Result<ComparisonRow, EvaluationError> {
    let (a, b) = (system.covered_ids(), reference.covered_ids());
    if a != b {
        return Err(EvaluationError::IdMismatch {
            left: system.system_id.clone(),
            right: reference.system_id.clone(),
            only_left: a.difference(&b).count(),
            only_right: b.difference(&a).count(),
        });
    }
    let by_id: BTreeMap<&SampleId, &DocumentScore> = reference.per_document.iter().map(|d| (&d.sample_id, d)).collect();
    let pairs: Vec<(&DocumentScore, &DocumentScore)> =
        system.per_document.iter().filter_map(|d| by_id.get(&d.sample_id).map(|r| (d, *r))).collect();
    if pairs.len() < 2 {
        return Err(StatsError::TooFewPairs(pairs.len()).into());
    }
    let col = |f: fn(&DocumentScore) -> f64, left: bool| pairs.iter().map(|(s, r)| f(if left { s } else { r })).collect::<Vec<f64>>();
    Ok(ComparisonRow {
        system_id: system.system_id.clone(),
        reference_id: reference.system_id.clone(),
        n_pairs: pairs.len(),
        fk_grade: compare_metric(&col(|d| d.fk_grade, true), &col(|d| d.fk_grade, false))?,
        smog_index: compare_metric(&col(|d| d.smog_index, true), &col(|d| d.smog_index, false))?,
    })
}

/// Seeded uniform draw of `n` ids without replacement, in draw order.
pub fn select_qualitative_sample<T: Clone>(pool: &[T], n: usize, seed: u64) -> Result<Vec<T>, EvaluationError> {
    if n > pool.len() {
        return Err(EvaluationError::SampleTooLarge { n, pool: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(pool.choose_multiple(&mut rng, n).cloned().collect())
}
