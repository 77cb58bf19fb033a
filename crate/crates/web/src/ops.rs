use serde::{Deserialize, Serialize};

use plainlang::evaluation::{trec_score, TrecCategory, TrecScore, TrecSentenceRating};
use plainlang::readability::{analyze_words, score, ReadabilityScore, TextStats, WordSyllables};
use plainlang::stats::{mean_sd, paired_t_test, SummaryStat, TTestResult};

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub stats: TextStats,
    pub score: ReadabilityScore,
    pub words: Vec<WordSyllables>,
}

pub fn analyze(text: &str) -> Result<Analysis, String> {
    let (stats, words) = analyze_words(text).map_err(|e| e.to_string())?;
    let score = score(&stats).map_err(|e| e.to_string())?;
    Ok(Analysis { stats, score, words })
}

#[derive(Debug, Serialize)]
pub struct Paired {
    pub a: SummaryStat,
    pub b: SummaryStat,
    pub test: TTestResult,
    pub p_display: String,
}

pub fn parse_series(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

pub fn paired(a: &str, b: &str) -> Result<Paired, String> {
    let (a, b) = (parse_series(a)?, parse_series(b)?);
    let test = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
    Ok(Paired {
        a: mean_sd(&a).map_err(|e| e.to_string())?,
        b: mean_sd(&b).map_err(|e| e.to_string())?,
        p_display: test.p_display(),
        test,
    })
}

// The page doesn't track sample ids or sentence positions.
#[derive(Deserialize)]
struct Rating {
    category: TrecCategory,
    value: i8,
}

pub fn trec(json: &str) -> Result<TrecScore, String> {
    let rows: Vec<Rating> = serde_json::from_str(json).map_err(|e| e.to_string())?;
    let ratings: Vec<_> = rows
        .into_iter()
        .enumerate()
        .map(|(i, r)| TrecSentenceRating { sample_id: "demo".into(), sentence_index: i, category: r.category, value: r.value })
        .collect();
    trec_score(&ratings).map_err(|e| e.to_string())
}
