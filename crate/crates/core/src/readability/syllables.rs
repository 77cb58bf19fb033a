//! Heuristic English syllable counter.
//!
//! Base rule: count groups of consecutive vowels (`a e i o u y`), drop a silent
//! terminal `e` unless the word ends in consonant + `le`, and never return less
//! than one. A handful of spelling patterns adjust the base count:
//!
//! * vowel pairs that are usually pronounced as two syllables (`ia`, `io`, `ua`,
//!   `uo`, `eo`, `iu`) add one, except after the consonants that turn
//!   them into a glide (`-tion`, `-cial`, `-sion`, `-gion`);
//! * a vowel group followed by `-ing` keeps the `i` as its own syllable;
//! * the silent `e` of `-es`/`-ed` endings and of `-ely`/`-ement`/`-eful`/
//!   `-eless`/`-eness` suffixes is dropped (kept after consonant + `l`/`r`:
//!   `tables`, `hundred`);
//! * `-ism` and combining-form prefixes (`gastro-`, `re-`, `co-`) followed by a
//!   vowel add one.
//!
//! Numeric tokens count as one syllable. Hyphenated tokens are the sum of their
//! parts.

use super::ReadabilityError;

/// Combining forms whose final vowel is pronounced separately from a following vowel.
const VOWEL_FINAL_PREFIXES: &[&str] = &[
    "gastro", "cardio", "electro", "micro", "macro", "neuro", "hydro", "intro", "retro", "socio",
    "radio", "bio", "geo", "pre", "re", "co", "de", "anti", "semi", "multi",
];

/// Words where the prefix rule would misfire because the letters are not a prefix.
const PREFIX_FALSE_FRIENDS: &[&str] = &[
    "react", "reach", "read", "ready", "real", "realize", "really", "reason", "coat", "coach", "cool",
    "coin", "deal", "dear", "death", "deep", "preach", "reign", "reuters", "coup", "cough", "could",
    "couple", "course", "court", "cousin", "count", "county", "counter", "doubt", "dead", "deaf",
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

/// Count syllables in a single token.
pub fn count_syllables(word: &str) -> Result<u32, ReadabilityError> {
    let token = word.trim_matches(|c: char| !c.is_alphanumeric());
    if token.is_empty() {
        return Err(ReadabilityError::EmptyToken);
    }
    if !token.chars().any(char::is_alphabetic) {
        return Ok(1);
    }
    let total = token
        .split('-')
        .filter_map(|part| {
            let letters: String = part
                .chars()
                .filter(|c| c.is_ascii_alphabetic())
                .map(|c| c.to_ascii_lowercase())
                .collect();
            if !letters.is_empty() {
                Some(count_alphabetic(&letters))
            } else if part.chars().any(|c| c.is_ascii_digit()) {
                Some(1)
            } else {
                None
            }
        })
        .sum::<u32>();
    Ok(total.max(1))
}

/// True when the token carries no letters at all (numbers, percentages, ranges).
pub fn is_numeric_token(word: &str) -> bool {
    !word.chars().any(char::is_alphabetic) && word.chars().any(|c| c.is_ascii_digit())
}

/// Vowel-group spans `[start, end)` over a lowercase ASCII word.
fn vowel_groups(w: &[u8]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let vowel_here = is_vowel(w[i])
            // word-initial "y" before a vowel is a consonant (yes, young)
            && !(w[i] == b'y' && i == 0 && w.get(1).is_some_and(|&n| is_vowel(n)))
            // "u" after "q" is part of the consonant (quality, frequent)
            && !(w[i] == b'u' && i > 0 && w[i - 1] == b'q');
        if !vowel_here {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < w.len() && is_vowel(w[i]) && !(w[i] == b'y' && i + 1 < w.len() && is_vowel(w[i + 1])) {
            i += 1;
        }
        groups.push((start, i));
    }
    groups
}

fn count_alphabetic(word: &str) -> u32 {
    let w = word.as_bytes();
    let groups = vowel_groups(w);
    let mut count = groups.len() as i32;

    for &(start, end) in &groups {
        count += hiatus_splits(w, start, end);
    }

    if ends_with_silent_e(w, &groups) {
        count -= 1;
    }
    count -= silent_suffix_e(w);

    if word.ends_with("ism") || word.ends_with("isms") {
        count += 1;
    }
    if has_vowel_final_prefix(word) {
        count += 1;
    }
    count.max(1) as u32
}

/// Extra syllables hidden inside one vowel group.
fn hiatus_splits(w: &[u8], start: usize, end: usize) -> i32 {
    let group = &w[start..end];
    let before = start.checked_sub(1).map(|i| w[i]);
    let after = &w[end..];
    let mut extra = 0;

    if group.len() >= 2 {
        // Vowel group directly before "ng" at the end: go-ing, be-ing, stud-y-ing.
        if group.last() == Some(&b'i') && after.starts_with(b"ng") && !matches!(group, [b'a', b'i'] | [b'e', b'i']) {
            extra += 1;
        }
        let glide_before = matches!(before, Some(b't' | b's' | b'c' | b'g' | b'x'));
        for pair in group.windows(2) {
            let splits = match pair {
                // word-final "io" always splits (ratio, radio)
                [b'i', b'o'] if after.is_empty() => true,
                [b'i', b'a'] => !glide_before,
                [b'i', b'o'] | [b'i', b'u'] => {
                    !glide_before && !matches!(before, Some(b'l' | b'n') if group.len() == 2 && after.first() == Some(&b'n'))
                }
                [b'u', b'i'] if after.starts_with(b"ty") || after.starts_with(b"ti") => true,
                [b'u', b'a'] | [b'u', b'o'] if before != Some(b'g') => true,
                [b'u', b'e'] if before != Some(b'g') => after.first().is_some_and(|&c| c == b'n' || c == b'l'),
                [b'e', b'o'] => !(before == Some(b'p') && after.starts_with(b"pl")) && !after.starts_with(b"us"),
                [b'e', b'a'] => end == w.len() || after.starts_with(b"te") || after.starts_with(b"tion"),
                [b'i', b'e'] => {
                    !glide_before && (after.starts_with(b"nce") || after.starts_with(b"nt") || after.starts_with(b"t"))
                        && !matches!(before, Some(b'r') if start == 1 || start == 2)
                }
                [b'o', b'e'] => after.first().is_some_and(|&c| !is_vowel(c)) && after != b"s",
                [b'y', b'i'] | [b'y', b'o'] | [b'y', b'a'] => true,
                _ => false,
            };
            if splits {
                extra += 1;
            }
        }
    }
    extra
}

fn ends_with_silent_e(w: &[u8], groups: &[(usize, usize)]) -> bool {
    let n = w.len();
    if n < 2 || w[n - 1] != b'e' || groups.len() < 2 {
        return false;
    }
    let last = groups[groups.len() - 1];
    if last != (n - 1, n) {
        // part of a longer group such as "ee" or "ie"
        return false;
    }
    // consonant + "le" keeps its syllable: sim-ple, ta-ble
    !(w[n - 2] == b'l' && n >= 3 && !is_vowel(w[n - 3]))
}

/// Silent "e" in inflectional endings and common suffixes.
fn silent_suffix_e(w: &[u8]) -> i32 {
    let n = w.len();
    let consonant_at = |i: usize| i < n && !is_vowel(w[i]);
    let mut silent = 0;

    // -es / -ed: the "e" is silent unless the stem ending forces a vowel.
    if n >= 4 && w[n - 2] == b'e' && matches!(w[n - 1], b's' | b'd') && consonant_at(n - 3) {
        let stem_end = w[n - 3];
        let voiced = if w[n - 1] == b's' {
            matches!(stem_end, b's' | b'x' | b'z' | b'c' | b'g') || w[..n - 2].ends_with(b"ch") || w[..n - 2].ends_with(b"sh")
        } else {
            matches!(stem_end, b't' | b'd')
        };
        // "-les" after a consonant keeps its syllable like "-le" (tables, particles)
        let le_syllable = stem_end == b'l' && n >= 5 && !is_vowel(w[n - 4]);
        // same after consonant + "r": hun-dred, sa-cred, a-cres (but not "barred")
        let re_syllable = stem_end == b'r' && n >= 5 && !is_vowel(w[n - 4]) && w[n - 4] != b'r';
        // a lone vowel group would be lost otherwise (bed, red)
        let has_other_vowel = w[..n - 2].iter().any(|&c| is_vowel(c));
        if !voiced && !le_syllable && !re_syllable && has_other_vowel {
            silent += 1;
        }
    }

    for suffix in [&b"ely"[..], b"ement", b"ements", b"eful", b"efully", b"eless", b"eness", b"ery"] {
        if w.ends_with(suffix) {
            let e = n - suffix.len();
            if e >= 2 && consonant_at(e - 1) && is_vowel(w[e - 2]) && suffix != b"ery" {
                silent += 1;
            }
            break;
        }
    }
    silent
}

fn has_vowel_final_prefix(word: &str) -> bool {
    if PREFIX_FALSE_FRIENDS.iter().any(|f| word.starts_with(f)) {
        return false;
    }
    VOWEL_FINAL_PREFIXES.iter().any(|p| {
        word.len() > p.len() + 2
            && word.starts_with(p)
            && word.as_bytes().get(p.len()).is_some_and(|&c| is_vowel(c) && c != b'y')
            // the prefix's own last vowel must not already split from the next (radio-, bio- handled by hiatus)
            && !matches!(&word.as_bytes()[p.len() - 1..=p.len()], [b'o', b'i'] | [b'o', b'a'] | [b'o', b'u'])
    }) || word.starts_with("gastroi")
}
