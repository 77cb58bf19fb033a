//! Agreement of the heuristic syllable counter with pronunciation-dictionary counts.

use plainlang::readability::count_syllables;

fn oracle() -> Vec<(String, Vec<u32>)> {
    include_str!("fixtures/syllable_oracle.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (word, counts) = l.split_once('\t').expect("tab-separated line");
            (word.to_string(), counts.split('|').map(|c| c.parse().unwrap()).collect())
        })
        .collect()
}

#[test]
fn agreement_with_dictionary() {
    let words = oracle();
    assert_eq!(words.len(), 200);
    let mut misses = Vec::new();
    for (word, counts) in &words {
        let got = count_syllables(word).unwrap();
        if !counts.contains(&got) {
            misses.push(format!("{word}: heuristic {got}, dictionary {counts:?}"));
        }
    }
    let agreement = 1.0 - misses.len() as f64 / words.len() as f64;
    for m in &misses {
        println!("disagreement  {m}");
    }
    println!("agreement {:.1}% ({} of {})", agreement * 100.0, words.len() - misses.len(), words.len());
    assert!(agreement >= 0.95);
}
