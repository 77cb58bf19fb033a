//! Five-point Likert ratings and their per-system aggregation.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::EvaluationError;
use crate::stats::{mean_sd, SummaryStat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Simplicity,
    Accuracy,
    Completeness,
    Brevity,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Self::Simplicity, Self::Accuracy, Self::Completeness, Self::Brevity];
}

/// One rater's scores for one blinded sample. Also the JSON-lines record
/// format of the rating store (extra fields there are ignored on ingest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertRating {
    pub rater_id: String,
    pub sample_id: String,
    pub system_id_hidden: String,
    pub simplicity: u8,
    pub accuracy: u8,
    pub completeness: u8,
    pub brevity: u8,
    pub timestamp: DateTime<Utc>,
}

impl LikertRating {
    pub fn get(&self, d: Dimension) -> u8 {
        match d {
            Dimension::Simplicity => self.simplicity,
            Dimension::Accuracy => self.accuracy,
            Dimension::Completeness => self.completeness,
            Dimension::Brevity => self.brevity,
        }
    }

    pub fn total(&self) -> u32 {
        Dimension::ALL.iter().map(|d| self.get(*d) as u32).sum()
    }

    pub fn validate(&self) -> Result<(), EvaluationError> {
        for d in Dimension::ALL {
            let v = self.get(d);
            if !(1..=5).contains(&v) {
                return Err(EvaluationError::InvalidRating(format!("{d:?} = {v} is outside 1..5")));
            }
        }
        if self.rater_id.trim().is_empty() {
            return Err(EvaluationError::InvalidRating("rater_id is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertSummary {
    pub system_id: String,
    pub n: usize,
    pub raters: usize,
    pub simplicity: SummaryStat,
    pub accuracy: SummaryStat,
    pub completeness: SummaryStat,
    pub brevity: SummaryStat,
    /// Mean/SD of the per-rating sum of the four dimensions.
    pub total_score: SummaryStat,
}

impl LikertSummary {
    pub fn dimension(&self, d: Dimension) -> &SummaryStat {
        match d {
            Dimension::Simplicity => &self.simplicity,
            Dimension::Accuracy => &self.accuracy,
            Dimension::Completeness => &self.completeness,
            Dimension::Brevity => &self.brevity,
        }
    }

    pub fn sum_of_dimension_means(&self) -> f64 {
        Dimension::ALL.iter().map(|d| self.dimension(*d).mean).sum()
    }
}

/// Aggregate the ratings of `system_id`; other systems' ratings are ignored.
pub fn aggregate_likert(ratings: &[LikertRating], system_id: &str) -> Result<LikertSummary, EvaluationError> {
    let mine: Vec<&LikertRating> = ratings.iter().filter(|r| r.system_id_hidden == system_id).collect();
    if mine.is_empty() {
        return Err(EvaluationError::NoRatings(system_id.to_string()));
    }
    for r in &mine {
        r.validate()?;
    }
    let column = |d: Dimension| -> Result<SummaryStat, EvaluationError> {
        let v: Vec<f64> = mine.iter().map(|r| r.get(d) as f64).collect();
        Ok(mean_sd(&v)?)
    };
    let totals: Vec<f64> = mine.iter().map(|r| r.total() as f64).collect();
    Ok(LikertSummary {
        system_id: system_id.to_string(),
        n: mine.len(),
        raters: mine.iter().map(|r| r.rater_id.as_str()).collect::<BTreeSet<_>>().len(),
        simplicity: column(Dimension::Simplicity)?,
        accuracy: column(Dimension::Accuracy)?,
        completeness: column(Dimension::Completeness)?,
        brevity: column(Dimension::Brevity)?,
        total_score: mean_sd(&totals)?,
    })
}

/// Read a ratings JSON-lines file, validating every record.
pub fn read_ratings_jsonl(path: impl AsRef<Path>) -> Result<Vec<LikertRating>, EvaluationError> {
    let path = path.as_ref();
    let io = |message: String| EvaluationError::Io { path: path.display().to_string(), message };
    let file = std::fs::File::open(path).map_err(|e| io(e.to_string()))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rating: LikertRating = serde_json::from_str(&line).map_err(|e| io(format!("line {}: {e}", i + 1)))?;
        rating.validate()?;
        out.push(rating);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn rating(rater: &str, system: &str, v: [u8; 4]) -> LikertRating {
        LikertRating {
            rater_id: rater.into(),
            sample_id: "s".into(),
            system_id_hidden: system.into(),
            simplicity: v[0],
            accuracy: v[1],
            completeness: v[2],
            brevity: v[3],
            timestamp: DateTime::from_timestamp(0, 0).unwrap(),
        }
    }

    #[test]
    fn single_rating() {
        let s = aggregate_likert(&[rating("r", "a", [5, 5, 5, 5])], "a").unwrap();
        assert_eq!(s.total_score.mean, 20.0);
        assert_eq!(s.total_score.sd, 0.0);
        assert_eq!(s.simplicity.sd, 0.0);
    }

    #[test]
    fn two_extremes() {
        let s = aggregate_likert(&[rating("r", "a", [1, 1, 1, 1]), rating("r2", "a", [5, 5, 5, 5]), rating("r", "b", [3, 3, 3, 3])], "a").unwrap();
        for d in Dimension::ALL {
            assert_eq!(s.dimension(d).mean, 3.0);
        }
        assert_eq!(s.total_score.mean, 12.0);
        assert_eq!((s.n, s.raters), (2, 2));
    }

    #[test]
    fn total_sd_uses_per_rating_sums() {
        // Dimensions anti-correlated: totals are constant although each dimension varies.
        let s = aggregate_likert(&[rating("r", "a", [1, 5, 3, 3]), rating("r", "a", [5, 1, 3, 3])], "a").unwrap();
        assert!(s.simplicity.sd > 0.0);
        assert_eq!(s.total_score.sd, 0.0);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(aggregate_likert(&[rating("r", "a", [6, 1, 1, 1])], "a"), Err(EvaluationError::InvalidRating(_))));
        assert!(matches!(aggregate_likert(&[rating("r", "a", [0, 1, 1, 1])], "a"), Err(EvaluationError::InvalidRating(_))));
        assert!(matches!(aggregate_likert(&[], "a"), Err(EvaluationError::NoRatings(_))));
    }

    #[test]
    fn missing_dimension_fails_ingest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        std::fs::write(&p, r#"{"rater_id":"r","sample_id":"s","system_id_hidden":"a","simplicity":3,"accuracy":3,"completeness":3,"timestamp":"2024-01-01T00:00:00Z"}"#).unwrap();
        assert!(matches!(read_ratings_jsonl(&p), Err(EvaluationError::Io { .. })));
    }
}
