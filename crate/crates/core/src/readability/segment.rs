//! Rule-based sentence segmentation and word tokenization.
//!
//! A sentence ends at `.`, `!` or `?` (optionally followed by closing quotes or
//! brackets) when the next non-space character is an uppercase letter or a digit,
//! or when the text ends. A period directly after a known abbreviation or a
//! single-letter initial never ends a sentence. Decimal numbers never split
//! because their period is not followed by whitespace.

/// Lowercased abbreviations (without the trailing period) that never end a sentence.
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "vs", "dr", "mr", "mrs", "ms", "prof", "st", "no", "nos", "fig", "figs", "al",
    "approx", "ca", "cf", "jr", "sr", "inc", "ltd", "co", "dept", "vol", "pp", "ref", "refs", "resp",
    "eq", "min", "max", "mg", "ml", "wk", "wks", "yr", "yrs", "mo", "mos", "ph.d", "m.d", "u.s",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201c}', '\u{2018}'];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split `text` into trimmed, non-empty sentences.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (_, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        // Absorb runs like "?!" or "..." and any closing punctuation.
        let mut j = i + 1;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let end_byte = chars.get(j).map_or(text.len(), |&(b, _)| b);

        if j >= chars.len() {
            break;
        }
        if !chars[j].1.is_whitespace() {
            i = j;
            continue;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k >= chars.len() {
            break;
        }
        while k < chars.len() && OPENERS.contains(&chars[k].1) {
            k += 1;
        }
        let next = chars.get(k).map(|&(_, c)| c);
        let starts_new = next.is_some_and(|n| n.is_uppercase() || n.is_ascii_digit());
        if starts_new && !(c == '.' && j == i + 1 && ends_with_abbreviation(&text[start..chars[i].0])) {
            push_trimmed(&mut sentences, &text[start..end_byte]);
            start = end_byte;
        }
        i = j;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, piece: &'a str) {
    let piece = piece.trim();
    if piece.chars().any(char::is_alphanumeric) {
        out.push(piece);
    }
}

fn ends_with_abbreviation(before_period: &str) -> bool {
    let last = before_period
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(OPENERS);
    if last.is_empty() {
        return false;
    }
    let mut letters = last.chars().filter(|c| c.is_alphabetic());
    // Single-letter initials such as "J." in "J. Smith".
    if last.chars().count() == 1 && letters.next().is_some_and(char::is_uppercase) {
        return true;
    }
    let lower = last.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Whitespace tokenization with leading/trailing punctuation stripped.
///
/// Internal hyphens and apostrophes stay inside the word. Tokens left with no
/// alphanumeric character (a lone dash, "...") are dropped.
pub fn tokenize_words(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .collect()
}
