//! Sentence-aligned adaptation corpus: ingestion, normalization and the
//! pmid-grouped train/validation split.
//!
//! # Upstream layout
//!
//! The dataset file is a JSON object keyed by question id. Each question object
//! holds an optional `"question"` string and one entry per abstract, keyed by
//! pmid (either directly or nested under an `"abstracts"` object). An abstract
//! entry has:
//!
//! * `"abstract"`: the source sentences, as an array of strings or as an object
//!   keyed by sentence number (`{"1": "...", "2": "..."}`);
//! * `"adaptations"`: an object keyed by adaptation id (or an array), where each
//!   adaptation is again an array or a sentence-number-keyed object.
//!
//! Numeric keys are ordered numerically; other keys keep document order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {record}: {message}")]
    Schema { record: String, message: String },
    #[error("duplicate pmid {pmid} in question {question_id}")]
    DuplicatePmid { question_id: String, pmid: String },
    #[error("train ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("unknown sample {0}")]
    UnknownSample(String),
}

fn schema(record: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::Schema { record: record.into(), message: message.into() }
}

/// One gold adaptation. Empty strings mark omitted sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptationReference {
    pub adaptation_id: String,
    pub target_sentences: Vec<String>,
}

/// One source abstract with its gold adaptations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractSample {
    pub pmid: String,
    pub question_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub source_sentences: Vec<String>,
    pub adaptations: Vec<AdaptationReference>,
}

impl AbstractSample {
    pub fn is_aligned(&self, adaptation: &AdaptationReference) -> bool {
        adaptation.target_sentences.len() == self.source_sentences.len()
    }

    pub fn sample_id(&self, adaptation: &AdaptationReference) -> SampleId {
        SampleId::new(&self.question_id, &self.pmid, &adaptation.adaptation_id)
    }

    pub fn source_text(&self) -> String {
        join_sentences(&self.source_sentences)
    }
}

/// Join sentences with single spaces, skipping omitted ("") entries.
pub fn join_sentences<S: AsRef<str>>(sentences: &[S]) -> String {
    sentences
        .iter()
        .map(|s| s.as_ref().trim())
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Identity of one (abstract, adaptation) pair: `question_id/pmid/adaptation_id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleId(pub String);

impl SampleId {
    pub fn new(question_id: &str, pmid: &str, adaptation_id: &str) -> Self {
        Self(format!("{question_id}/{pmid}/{adaptation_id}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SampleId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// A borrowed view of one (abstract, adaptation) pair.
#[derive(Debug, Clone, Copy)]
pub struct SampleRef<'a> {
    pub abstract_sample: &'a AbstractSample,
    pub adaptation: &'a AdaptationReference,
}

impl SampleRef<'_> {
    pub fn id(&self) -> SampleId {
        self.abstract_sample.sample_id(self.adaptation)
    }

    pub fn is_aligned(&self) -> bool {
        self.abstract_sample.is_aligned(self.adaptation)
    }
}

/// Immutable collection of abstracts, ordered by (question_id, pmid).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    samples: Vec<AbstractSample>,
}

impl Corpus {
    pub fn new(mut samples: Vec<AbstractSample>) -> Self {
        samples.sort_by(|a, b| {
            natural_cmp(&a.question_id, &b.question_id).then_with(|| natural_cmp(&a.pmid, &b.pmid))
        });
        Self { samples }
    }

    pub fn abstracts(&self) -> &[AbstractSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn adaptation_count(&self) -> usize {
        self.samples.iter().map(|s| s.adaptations.len()).sum()
    }

    /// Every (abstract, adaptation) pair in stable order.
    pub fn samples(&self) -> impl Iterator<Item = SampleRef<'_>> {
        self.samples
            .iter()
            .flat_map(|a| a.adaptations.iter().map(move |adaptation| SampleRef { abstract_sample: a, adaptation }))
    }

    pub fn sample(&self, id: &SampleId) -> Option<SampleRef<'_>> {
        let mut parts = id.0.splitn(3, '/');
        let (q, p, a) = (parts.next()?, parts.next()?, parts.next()?);
        let abstract_sample = self.samples.iter().find(|s| s.question_id == q && s.pmid == p)?;
        let adaptation = abstract_sample.adaptations.iter().find(|x| x.adaptation_id == a)?;
        Some(SampleRef { abstract_sample, adaptation })
    }

    pub fn question_ids(&self) -> BTreeSet<&str> {
        self.samples.iter().map(|s| s.question_id.as_str()).collect()
    }
}

/// Compare strings numerically when both parse as integers.
pub fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentViolation {
    pub sample_id: SampleId,
    pub adaptation_id: String,
    pub source_len: usize,
    pub target_len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub abstracts: usize,
    pub adaptations: usize,
    pub aligned: usize,
    pub violations: Vec<AlignmentViolation>,
}

pub fn validate_alignment(corpus: &Corpus) -> AlignmentReport {
    let mut report = AlignmentReport { abstracts: corpus.len(), ..Default::default() };
    for sample in corpus.samples() {
        report.adaptations += 1;
        if sample.is_aligned() {
            report.aligned += 1;
        } else {
            report.violations.push(AlignmentViolation {
                sample_id: sample.id(),
                adaptation_id: sample.adaptation.adaptation_id.clone(),
                source_len: sample.abstract_sample.source_sentences.len(),
                target_len: sample.adaptation.target_sentences.len(),
            });
        }
    }
    report
}

/// Key/value pairs of a JSON object in document order, duplicates kept.
struct Entries(Vec<(String, Value)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;
        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Value>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        deserializer.deserialize_map(EntriesVisitor)
    }
}

/// Per-question view with duplicate keys preserved.
struct QuestionEntries(Vec<(String, QuestionValue)>);

enum QuestionValue {
    Plain(Value),
    Nested(Entries),
}

impl<'de> Deserialize<'de> for QuestionEntries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct QVisitor;
        impl<'de> Visitor<'de> for QVisitor {
            type Value = QuestionEntries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a question object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<QuestionEntries, A::Error> {
                let mut out = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    if key == "abstracts" {
                        out.push((key, QuestionValue::Nested(map.next_value::<Entries>()?)));
                    } else {
                        out.push((key, QuestionValue::Plain(map.next_value::<Value>()?)));
                    }
                }
                Ok(QuestionEntries(out))
            }
        }
        deserializer.deserialize_map(QVisitor)
    }
}

/// Load the upstream dataset file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_corpus(&text)
}

pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    if !text.trim_start().starts_with('{') {
        return Err(schema("<root>", "expected an object keyed by question id"));
    }
    let top_entries: TopEntries = serde_json::from_str(text)?;
    if top_entries.0.is_empty() {
        return Err(schema("<root>", "no questions"));
    }

    let mut samples = Vec::new();
    for (question_id, question) in top_entries.0 {
        let mut question_text = None;
        let mut seen = BTreeSet::new();
        let mut abstracts: Vec<(String, Value)> = Vec::new();
        for (key, value) in question.0 {
            match (key.as_str(), value) {
                ("question", QuestionValue::Plain(Value::String(s))) => question_text = Some(s),
                ("question", _) => return Err(schema(format!("question {question_id}"), "\"question\" must be a string")),
                ("abstracts", QuestionValue::Nested(entries)) => abstracts.extend(entries.0),
                (_, QuestionValue::Plain(v @ Value::Object(_))) => abstracts.push((key, v)),
                (_, QuestionValue::Plain(_)) | (_, QuestionValue::Nested(_)) => {
                    return Err(schema(format!("question {question_id}/{key}"), "expected an abstract object"))
                }
            }
        }
        if abstracts.is_empty() {
            return Err(schema(format!("question {question_id}"), "no abstracts"));
        }
        for (pmid, value) in abstracts {
            if !seen.insert(pmid.clone()) {
                return Err(CorpusError::DuplicatePmid { question_id: question_id.clone(), pmid });
            }
            samples.push(parse_abstract(&question_id, question_text.clone(), &pmid, &value)?);
        }
    }
    Ok(Corpus::new(samples))
}

struct TopEntries(Vec<(String, QuestionEntries)>);

impl<'de> Deserialize<'de> for TopEntries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TopVisitor;
        impl<'de> Visitor<'de> for TopVisitor {
            type Value = TopEntries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object keyed by question id")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<TopEntries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, QuestionEntries>()? {
                    out.push((k, v));
                }
                Ok(TopEntries(out))
            }
        }
        deserializer.deserialize_map(TopVisitor)
    }
}

fn parse_abstract(question_id: &str, question: Option<String>, pmid: &str, value: &Value) -> Result<AbstractSample, CorpusError> {
    let record = format!("question {question_id}/pmid {pmid}");
    let source = value.get("abstract").ok_or_else(|| schema(&record, "missing \"abstract\""))?;
    let source_sentences = sentence_list(source).map_err(|m| schema(&record, format!("abstract: {m}")))?;
    if source_sentences.is_empty() {
        return Err(schema(&record, "abstract has no sentences"));
    }
    if let Some(i) = source_sentences.iter().position(|s| s.trim().is_empty()) {
        return Err(schema(&record, format!("abstract sentence {} is empty", i + 1)));
    }

    let mut adaptations = Vec::new();
    match value.get("adaptations") {
        None | Some(Value::Null) => {}
        Some(Value::Object(map)) => {
            for (id, v) in ordered(map) {
                let target_sentences = sentence_list(v).map_err(|m| schema(&record, format!("adaptation {id}: {m}")))?;
                adaptations.push(AdaptationReference { adaptation_id: id.to_string(), target_sentences });
            }
        }
        Some(Value::Array(items)) => {
            for (i, v) in items.iter().enumerate() {
                let id = (i + 1).to_string();
                let target_sentences = sentence_list(v).map_err(|m| schema(&record, format!("adaptation {id}: {m}")))?;
                adaptations.push(AdaptationReference { adaptation_id: id, target_sentences });
            }
        }
        Some(_) => return Err(schema(&record, "\"adaptations\" must be an object or array")),
    }
    Ok(AbstractSample {
        pmid: pmid.to_string(),
        question_id: question_id.to_string(),
        question,
        source_sentences,
        adaptations,
    })
}

/// Object entries with numeric keys ordered numerically.
fn ordered(map: &serde_json::Map<String, Value>) -> Vec<(&str, &Value)> {
    let mut entries: Vec<(&str, &Value)> = map.iter().map(|(k, v)| (k.as_str(), v)).collect();
    if entries.iter().all(|(k, _)| k.parse::<u64>().is_ok()) {
        entries.sort_by(|a, b| natural_cmp(a.0, b.0));
    }
    entries
}

fn sentence_list(value: &Value) -> Result<Vec<String>, String> {
    let as_string = |v: &Value| match v {
        Value::String(s) => Ok(s.clone()),
        Value::Null => Ok(String::new()),
        other => Err(format!("expected a sentence string, found {other}")),
    };
    match value {
        Value::Array(items) => items.iter().map(as_string).collect(),
        Value::Object(map) => ordered(map).into_iter().map(|(_, v)| as_string(v)).collect(),
        _ => Err("expected an array or sentence-number-keyed object".to_string()),
    }
}

/// Write the normalized corpus, one abstract per line.
pub fn write_corpus_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let io = |source| CorpusError::Io { path: path.display().to_string(), source };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for sample in corpus.abstracts() {
        serde_json::to_writer(&mut out, sample)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_corpus_jsonl(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let io = |source| CorpusError::Io { path: path.display().to_string(), source };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: AbstractSample =
            serde_json::from_str(&line).map_err(|e| schema(format!("line {}", i + 1), e.to_string()))?;
        if sample.source_sentences.is_empty() {
            return Err(schema(format!("line {}", i + 1), "abstract has no sentences"));
        }
        samples.push(sample);
    }
    Ok(Corpus::new(samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Train,
    Validation,
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Side::Train),
            "validation" | "val" => Ok(Side::Validation),
            other => Err(format!("unknown split side {other:?} (train|validation)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionAssignment {
    pub train: Vec<String>,
    pub validation: Vec<String>,
}

/// Result of [`split_corpus`]; serialized as the split manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub ratio: f64,
    pub train_pmids: BTreeSet<String>,
    pub validation_pmids: BTreeSet<String>,
    pub train_sample_ids: Vec<SampleId>,
    pub validation_sample_ids: Vec<SampleId>,
    pub per_question: BTreeMap<String, QuestionAssignment>,
    pub sample_counts: SampleCounts,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub train: usize,
    pub validation: usize,
    pub total: usize,
}

impl SplitAssignment {
    pub fn sample_ids(&self, side: Side) -> &[SampleId] {
        match side {
            Side::Train => &self.train_sample_ids,
            Side::Validation => &self.validation_sample_ids,
        }
    }

    pub fn side_of_pmid(&self, pmid: &str) -> Option<Side> {
        if self.train_pmids.contains(pmid) {
            Some(Side::Train)
        } else if self.validation_pmids.contains(pmid) {
            Some(Side::Validation)
        } else {
            None
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Pmid-grouped split: within each question the pmids are shuffled with `seed`
/// and the first `round(train_ratio * group_size)` go to train. Every
/// (abstract, adaptation) sample follows its pmid.
pub fn split_corpus(corpus: &Corpus, train_ratio: f64, seed: u64) -> Result<SplitAssignment, CorpusError> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(CorpusError::InvalidRatio(train_ratio));
    }
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for s in corpus.abstracts() {
        groups.entry(&s.question_id).or_default().push(&s.pmid);
    }
    let mut questions: Vec<&str> = groups.keys().copied().collect();
    questions.sort_by(|a, b| natural_cmp(a, b));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned: HashMap<&str, Side> = HashMap::new();
    let mut per_question = BTreeMap::new();
    let mut warnings = Vec::new();

    for q in questions {
        let mut pmids = groups[q].clone();
        pmids.sort_by(|a, b| natural_cmp(a, b));
        pmids.dedup();
        let mut qa = QuestionAssignment::default();
        if pmids.len() < 2 {
            warnings.push(format!("question {q} has {} pmid(s); whole group assigned to train", pmids.len()));
        }
        let target_train = if pmids.len() < 2 { pmids.len() } else { (train_ratio * pmids.len() as f64).round() as usize };

        // Pmids already placed by an earlier question keep their side.
        let (fixed, mut free): (Vec<&str>, Vec<&str>) = pmids.iter().partition(|p| assigned.contains_key(*p));
        free.shuffle(&mut rng);
        let fixed_train = fixed.iter().filter(|p| assigned[*p] == Side::Train).count();
        let need_train = target_train.saturating_sub(fixed_train).min(free.len());
        if !fixed.is_empty() && fixed_train + need_train != target_train {
            warnings.push(format!("question {q}: pmids shared with earlier questions forced {} train instead of {target_train}", fixed_train + need_train));
        }
        for (i, p) in free.iter().enumerate() {
            assigned.insert(p, if i < need_train { Side::Train } else { Side::Validation });
        }
        for p in &pmids {
            match assigned[p] {
                Side::Train => qa.train.push(p.to_string()),
                Side::Validation => qa.validation.push(p.to_string()),
            }
        }
        per_question.insert(q.to_string(), qa);
    }

    let mut train_pmids = BTreeSet::new();
    let mut validation_pmids = BTreeSet::new();
    for (p, side) in &assigned {
        match side {
            Side::Train => train_pmids.insert(p.to_string()),
            Side::Validation => validation_pmids.insert(p.to_string()),
        };
    }
    let mut train_sample_ids = Vec::new();
    let mut validation_sample_ids = Vec::new();
    for sample in corpus.samples() {
        match assigned[sample.abstract_sample.pmid.as_str()] {
            Side::Train => train_sample_ids.push(sample.id()),
            Side::Validation => validation_sample_ids.push(sample.id()),
        }
    }
    let sample_counts = SampleCounts {
        train: train_sample_ids.len(),
        validation: validation_sample_ids.len(),
        total: train_sample_ids.len() + validation_sample_ids.len(),
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(SplitAssignment {
        seed,
        ratio: train_ratio,
        train_pmids,
        validation_pmids,
        train_sample_ids,
        validation_sample_ids,
        per_question,
        sample_counts,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{
      "1": {
        "question": "What is heart disease?",
        "111": {
          "abstract": {"1": "Cardiovascular disease is common.", "2": "It kills many.", "10": "Tenth."},
          "adaptations": {
            "1": {"1": "Heart disease is common.", "2": "", "10": "Ten."},
            "2": {"1": "Heart disease is common.", "2": "It kills.", "10": "Ten."}
          }
        }
      },
      "2": {
        "question": "Braces?",
        "222": {
          "abstract": ["Nighttime orthoses help.", "They are cheap."],
          "adaptations": [["Night braces help.", "They are cheap."]]
        }
      }
    }"#;

    #[test]
    fn fixture_counts() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.adaptation_count(), 3);
        let first = &corpus.abstracts()[0];
        assert_eq!(first.question.as_deref(), Some("What is heart disease?"));
        // numeric key ordering: "10" after "2"
        assert_eq!(first.source_sentences[2], "Tenth.");
        assert_eq!(first.adaptations[0].target_sentences[1], "");
    }

    #[test]
    fn empty_object_is_a_schema_violation() {
        assert!(matches!(parse_corpus("{}"), Err(CorpusError::Schema { .. })));
    }

    #[test]
    fn schema_errors_name_the_record() {
        let err = parse_corpus(r#"{"7": {"99": {"adaptations": {}}}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("question 7/pmid 99"), "{msg}");
    }

    #[test]
    fn duplicate_pmid_within_question() {
        let text = r#"{"1": {"5": {"abstract": ["A."]}, "5": {"abstract": ["B."]}}}"#;
        assert!(matches!(parse_corpus(text), Err(CorpusError::DuplicatePmid { .. })));
    }

    #[test]
    fn nested_abstracts_key() {
        let text = r#"{"1": {"question": "q", "abstracts": {"5": {"abstract": ["A."], "adaptations": {"x": ["a."]}}}}}"#;
        let corpus = parse_corpus(text).unwrap();
        assert_eq!(corpus.abstracts()[0].adaptations[0].adaptation_id, "x");
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_corpus("/nonexistent/plaba.json"), Err(CorpusError::Io { .. })));
    }

    fn fixture_with(source_len: usize, target_len: usize, omit: bool) -> Corpus {
        let target = (0..target_len).map(|i| if omit && i == 2 { String::new() } else { format!("t{i}.") }).collect();
        Corpus::new(vec![AbstractSample {
            pmid: "1".into(),
            question_id: "q".into(),
            question: None,
            source_sentences: (0..source_len).map(|i| format!("S{i}.")).collect(),
            adaptations: vec![AdaptationReference { adaptation_id: "a1".into(), target_sentences: target }],
        }])
    }

    #[test]
    fn alignment_reporting() {
        assert!(validate_alignment(&fixture_with(5, 5, false)).violations.is_empty());
        let report = validate_alignment(&fixture_with(5, 4, false));
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].adaptation_id, "a1");
        assert!(validate_alignment(&fixture_with(5, 5, true)).violations.is_empty());
    }

    pub(crate) fn toy_corpus(questions: usize, pmids: usize) -> Corpus {
        let mut samples = Vec::new();
        for q in 0..questions {
            for p in 0..pmids {
                let n_adapt = 1 + (p % 2);
                samples.push(AbstractSample {
                    pmid: format!("{}", 1000 + q * 100 + p),
                    question_id: q.to_string(),
                    question: None,
                    source_sentences: vec!["A sentence.".into()],
                    adaptations: (0..n_adapt)
                        .map(|a| AdaptationReference { adaptation_id: (a + 1).to_string(), target_sentences: vec!["a.".into()] })
                        .collect(),
                });
            }
        }
        Corpus::new(samples)
    }

    #[test]
    fn two_questions_ten_pmids() {
        let corpus = toy_corpus(2, 10);
        let split = split_corpus(&corpus, 0.8, 7).unwrap();
        for qa in split.per_question.values() {
            assert_eq!(qa.train.len(), 8);
            assert_eq!(qa.validation.len(), 2);
        }
        assert_eq!(split.train_pmids.len(), 16);
        assert_eq!(split.validation_pmids.len(), 4);
        assert_eq!(split.sample_counts.total, corpus.adaptation_count());
        assert_eq!(split, split_corpus(&corpus, 0.8, 7).unwrap());
    }

    #[test]
    fn singleton_group_goes_to_train() {
        let corpus = toy_corpus(1, 1);
        let split = split_corpus(&corpus, 0.8, 1).unwrap();
        assert_eq!(split.train_pmids.len(), 1);
        assert!(split.validation_pmids.is_empty());
        assert_eq!(split.warnings.len(), 1);
    }

    #[test]
    fn invalid_ratio() {
        let corpus = toy_corpus(1, 3);
        assert!(matches!(split_corpus(&corpus, 1.0, 1), Err(CorpusError::InvalidRatio(_))));
        assert!(matches!(split_corpus(&corpus, 0.0, 1), Err(CorpusError::InvalidRatio(_))));
        assert!(matches!(split_corpus(&Corpus::default(), 0.5, 1), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn shared_pmid_never_leaks() {
        let mut samples = toy_corpus(2, 4).abstracts().to_vec();
        let mut dup = samples[0].clone();
        dup.question_id = "1".into();
        samples.push(dup);
        let corpus = Corpus::new(samples);
        let split = split_corpus(&corpus, 0.5, 3).unwrap();
        assert!(split.train_pmids.is_disjoint(&split.validation_pmids));
        for id in &split.validation_sample_ids {
            let s = corpus.sample(id).unwrap();
            assert!(!split.train_pmids.contains(&s.abstract_sample.pmid));
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        write_corpus_jsonl(&corpus, &path).unwrap();
        assert_eq!(read_corpus_jsonl(&path).unwrap(), corpus);
    }

    #[test]
    fn sample_lookup() {
        let corpus = parse_corpus(FIXTURE).unwrap();
        let id = SampleId::new("1", "111", "2");
        assert_eq!(corpus.sample(&id).unwrap().adaptation.target_sentences[1], "It kills.");
        assert!(corpus.sample(&SampleId::from("1/111/9")).is_none());
    }
}
