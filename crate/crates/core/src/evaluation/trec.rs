//! Per-sentence three-point ratings mapped onto [0, 1].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvaluationError;

/// Recorded in every score so consumers know the map is a modelling choice.
pub const TREC_MAPPING: &str = "linear: (mean + 1) / 2 per category, then unweighted mean";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrecCategory {
    Accuracy,
    Completeness,
    Simplicity,
    Brevity,
}

impl TrecCategory {
    pub const ALL: [TrecCategory; 4] = [Self::Accuracy, Self::Completeness, Self::Simplicity, Self::Brevity];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrecSentenceRating {
    pub sample_id: String,
    pub sentence_index: usize,
    pub category: TrecCategory,
    pub value: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrecScore {
    pub accuracy: f64,
    pub completeness: f64,
    pub simplicity: f64,
    pub brevity: f64,
    pub final_avg: f64,
    pub mapping: String,
}

impl TrecScore {
    pub fn category(&self, c: TrecCategory) -> f64 {
        match c {
            TrecCategory::Accuracy => self.accuracy,
            TrecCategory::Completeness => self.completeness,
            TrecCategory::Simplicity => self.simplicity,
            TrecCategory::Brevity => self.brevity,
        }
    }
}

pub fn trec_score(ratings: &[TrecSentenceRating]) -> Result<TrecScore, EvaluationError> {
    let mut by_category: BTreeMap<TrecCategory, (i64, usize)> = BTreeMap::new();
    for r in ratings {
        if !(-1..=1).contains(&r.value) {
            return Err(EvaluationError::InvalidRating(format!("TREC value {} is not one of -1, 0, 1", r.value)));
        }
        let e = by_category.entry(r.category).or_default();
        e.0 += r.value as i64;
        e.1 += 1;
    }
    let mut scores = [0.0; 4];
    for (slot, c) in scores.iter_mut().zip(TrecCategory::ALL) {
        let (sum, n) = by_category.get(&c).copied().ok_or(EvaluationError::MissingCategory(c))?;
        *slot = (sum as f64 / n as f64 + 1.0) / 2.0;
    }
    let [accuracy, completeness, simplicity, brevity] = scores;
    Ok(TrecScore {
        accuracy,
        completeness,
        simplicity,
        brevity,
        final_avg: scores.iter().sum::<f64>() / 4.0,
        mapping: TREC_MAPPING.to_string(),
    })
}
