//! Text statistics and the Flesch-Kincaid / SMOG grade-level formulas.
//!
//! FK grade: `0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59`
//!
//! SMOG: `1.0430 * sqrt(30 * polysyllables / sentences) + 3.1291`
//!
//! SMOG was normed on 30-sentence samples, so every score computed from fewer
//! sentences carries a low-confidence flag.

mod segment;
mod syllables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use segment::{split_sentences, tokenize_words};
pub use syllables::{count_syllables, is_numeric_token};

/// Formula coefficients, pinned in one place.
pub mod constants {
    pub const FK_WORDS_PER_SENTENCE: f64 = 0.39;
    pub const FK_SYLLABLES_PER_WORD: f64 = 11.8;
    pub const FK_INTERCEPT: f64 = -15.59;
    pub const SMOG_SLOPE: f64 = 1.0430;
    pub const SMOG_INTERCEPT: f64 = 3.1291;
    /// Sample size the SMOG formula was normed on.
    pub const SMOG_NORM_SENTENCES: u32 = 30;
    /// Words with at least this many syllables are polysyllables.
    pub const POLYSYLLABLE_MIN: u32 = 3;
    /// US grade 8: the plain-language target reading level.
    pub const TARGET_GRADE: f64 = 8.0;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReadabilityError {
    #[error("empty token")]
    EmptyToken,
    #[error("text contains no words")]
    EmptyText,
    #[error("statistics have zero words")]
    ZeroWords,
    #[error("statistics have zero sentences")]
    ZeroSentences,
}

/// Count substrate shared by both formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextStats {
    pub sentence_count: u32,
    pub word_count: u32,
    pub syllable_count: u32,
    pub polysyllable_count: u32,
}

impl TextStats {
    pub fn new(sentence_count: u32, word_count: u32, syllable_count: u32, polysyllable_count: u32) -> Self {
        Self { sentence_count, word_count, syllable_count, polysyllable_count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScore {
    pub fk_grade: f64,
    pub smog_index: f64,
    pub smog_low_confidence: bool,
}

/// Per-word breakdown, used by interactive front ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSyllables {
    pub word: String,
    pub syllables: u32,
    pub polysyllable: bool,
}

/// Segment, tokenize and count a text.
pub fn text_statistics(text: &str) -> Result<TextStats, ReadabilityError> {
    let (stats, _) = analyze_words(text)?;
    Ok(stats)
}

/// Like [`text_statistics`] but also returns the per-word syllable counts.
pub fn analyze_words(text: &str) -> Result<(TextStats, Vec<WordSyllables>), ReadabilityError> {
    let words = tokenize_words(text);
    if words.is_empty() {
        return Err(ReadabilityError::EmptyText);
    }
    let sentence_count = split_sentences(text).len().max(1) as u32;
    let mut breakdown = Vec::with_capacity(words.len());
    let mut syllable_count = 0;
    let mut polysyllable_count = 0;
    for word in words {
        let syllables = count_syllables(word)?;
        let polysyllable = !is_numeric_token(word) && syllables >= constants::POLYSYLLABLE_MIN;
        syllable_count += syllables;
        polysyllable_count += u32::from(polysyllable);
        breakdown.push(WordSyllables { word: word.to_string(), syllables, polysyllable });
    }
    let stats = TextStats {
        sentence_count,
        word_count: breakdown.len() as u32,
        syllable_count,
        polysyllable_count,
    };
    Ok((stats, breakdown))
}

pub fn fk_grade(stats: &TextStats) -> Result<f64, ReadabilityError> {
    use constants::*;
    if stats.word_count == 0 {
        return Err(ReadabilityError::ZeroWords);
    }
    if stats.sentence_count == 0 {
        return Err(ReadabilityError::ZeroSentences);
    }
    let words = f64::from(stats.word_count);
    let words_per_sentence = words / f64::from(stats.sentence_count);
    let syllables_per_word = f64::from(stats.syllable_count) / words;
    Ok(FK_WORDS_PER_SENTENCE * words_per_sentence + FK_SYLLABLES_PER_WORD * syllables_per_word + FK_INTERCEPT)
}

/// SMOG index and whether it was computed from fewer than 30 sentences.
pub fn smog_index(stats: &TextStats) -> Result<(f64, bool), ReadabilityError> {
    use constants::*;
    if stats.sentence_count == 0 {
        return Err(ReadabilityError::ZeroSentences);
    }
    let density = f64::from(SMOG_NORM_SENTENCES) * f64::from(stats.polysyllable_count) / f64::from(stats.sentence_count);
    let low_confidence = stats.sentence_count < SMOG_NORM_SENTENCES;
    Ok((SMOG_SLOPE * density.sqrt() + SMOG_INTERCEPT, low_confidence))
}

pub fn score(stats: &TextStats) -> Result<ReadabilityScore, ReadabilityError> {
    let fk_grade = fk_grade(stats)?;
    let (smog_index, smog_low_confidence) = smog_index(stats)?;
    Ok(ReadabilityScore { fk_grade, smog_index, smog_low_confidence })
}

pub fn score_text(text: &str) -> Result<ReadabilityScore, ReadabilityError> {
    score(&text_statistics(text)?)
}
