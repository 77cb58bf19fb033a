//! Parsing model replies: adaptation lists and critic questions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Both variants are repairable: the caller may re-ask the model.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseError {
    #[error("reply is not a JSON list of strings")]
    Unparseable,
    #[error("expected {expected} adaptations, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Parse a reply into exactly `expected_len` adapted sentences.
///
/// Code fences and prose around the list are ignored; the first `[` that
/// starts a complete JSON array of strings wins. Empty strings are kept.
pub fn parse_adaptation_list(raw: &str, expected_len: usize) -> Result<Vec<String>, ParseError> {
    let list = extract_string_list(raw).ok_or(ParseError::Unparseable)?;
    if list.len() != expected_len {
        return Err(ParseError::LengthMismatch { expected: expected_len, got: list.len() });
    }
    Ok(list)
}

fn extract_string_list(raw: &str) -> Option<Vec<String>> {
    let fenced = fenced_body(raw);
    let candidates = fenced.iter().map(String::as_str).chain(std::iter::once(raw));
    for text in candidates {
        for (i, _) in text.match_indices('[') {
            let mut stream = serde_json::Deserializer::from_str(&text[i..]).into_iter::<Vec<String>>();
            if let Some(Ok(list)) = stream.next() {
                return Some(list);
            }
        }
    }
    None
}

/// Bodies of ``` fenced blocks, language tag dropped.
fn fenced_body(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = raw;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        let body_start = after.find('\n').map_or(0, |n| n + 1);
        let Some(close) = after[body_start..].find("```") else { break };
        out.push(after[body_start..body_start + close].to_string());
        rest = &after[body_start + close + 3..];
    }
    out
}

/// Critic questions: one per line, bullets and numbering stripped. Lines
/// containing a question mark are preferred; if there are none, every
/// non-empty line counts.
pub fn parse_questions(raw: &str) -> Vec<String> {
    let lines: Vec<String> = raw
        .lines()
        .map(|l| {
            l.trim()
                .trim_start_matches(['-', '*', '\u{2022}'])
                .trim_start()
                .trim_start_matches(|c: char| c.is_ascii_digit())
                .trim_start_matches(['.', ')', ':'])
                .trim()
                .to_string()
        })
        .filter(|l| !l.is_empty())
        .collect();
    let questions: Vec<String> = lines.iter().filter(|l| l.contains('?')).cloned().collect();
    if questions.is_empty() {
        lines
    } else {
        questions
    }
}
