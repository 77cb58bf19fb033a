//! Sessions, blinding and the append-only rating store.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use plainlang::adapters::AdaptationResult;
use plainlang::corpus::Corpus;
use plainlang::evaluation::{select_qualitative_sample, LikertRating};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("rating pool is empty")]
    EmptyPool,
    #[error("requested {n} samples but the pool holds {pool}")]
    TooLarge { n: usize, pool: usize },
    #[error("n must be positive")]
    ZeroSamples,
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("item {item_id:?} is not part of session {session_id:?}")]
    UnknownSample { session_id: String, item_id: String },
    #[error("missing dimension {0}")]
    MissingDimension(&'static str),
    #[error("{dimension} = {value} is outside 1..5")]
    OutOfRange { dimension: &'static str, value: u8 },
    #[error("rater_id must not be empty")]
    MissingRater,
    #[error("rater {rater_id:?} already rated item {item_id:?}")]
    Duplicate { rater_id: String, item_id: String },
    #[error("{path}: {message}")]
    Store { path: String, message: String },
}

impl ServiceError {
    /// Stable machine-readable code for error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyPool => "empty_pool",
            Self::TooLarge { .. } => "too_large",
            Self::ZeroSamples => "invalid_n",
            Self::UnknownSession(_) => "unknown_session",
            Self::UnknownSample { .. } => "unknown_sample",
            Self::MissingDimension(_) => "missing_dimension",
            Self::OutOfRange { .. } => "out_of_range",
            Self::MissingRater => "missing_rater",
            Self::Duplicate { .. } => "duplicate",
            Self::Store { .. } => "store_error",
        }
    }
}

/// One system's adaptation of one sample, as offered for rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolItem {
    /// Opaque id; reveals neither sample nor system.
    pub item_id: String,
    pub sample_id: String,
    pub system_id: String,
    pub source_sentences: Vec<String>,
    pub adapted_sentences: Vec<String>,
}

fn item_id(system_id: &str, sample_id: &str) -> String {
    let digest = Sha256::digest(format!("{system_id}\u{1f}{sample_id}").as_bytes());
    hex::encode(&digest[..8])
}

/// The blinded pool. Items are ordered by their opaque id, which interleaves systems.
#[derive(Debug, Clone, Default)]
pub struct Pool {
    items: Vec<PoolItem>,
}

impl Pool {
    pub fn new(mut items: Vec<PoolItem>) -> Self {
        items.sort_by(|a, b| a.item_id.cmp(&b.item_id));
        items.dedup_by(|a, b| a.item_id == b.item_id);
        Self { items }
    }

    /// Build from named runs; source sentences come from the corpus.
    pub fn from_runs(corpus: &Corpus, runs: &[(String, Vec<AdaptationResult>)]) -> Self {
        let mut items = Vec::new();
        for (system_id, results) in runs {
            for r in results {
                let Some(sample) = corpus.sample(&r.sample_id) else {
                    log::warn!("{system_id}: sample {} not in corpus; skipped", r.sample_id);
                    continue;
                };
                items.push(PoolItem {
                    item_id: item_id(system_id, r.sample_id.as_str()),
                    sample_id: r.sample_id.to_string(),
                    system_id: system_id.clone(),
                    source_sentences: sample.abstract_sample.source_sentences.clone(),
                    adapted_sentences: r.adapted_sentences.clone(),
                });
            }
        }
        Self::new(items)
    }

    pub fn from_items(items: impl IntoIterator<Item = (String, String, Vec<String>, Vec<String>)>) -> Self {
        Self::new(
            items
                .into_iter()
                .map(|(system_id, sample_id, source_sentences, adapted_sentences)| PoolItem {
                    item_id: item_id(&system_id, &sample_id),
                    sample_id,
                    system_id,
                    source_sentences,
                    adapted_sentences,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, item_id: &str) -> Option<&PoolItem> {
        self.items.binary_search_by(|i| i.item_id.as_str().cmp(item_id)).ok().map(|i| &self.items[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hidden {
    pub sample_id: String,
    pub system_id: String,
}

/// Server-side session record, including the blinding map. Never sent to raters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSession {
    pub session_id: String,
    pub seed: u64,
    pub item_ids: Vec<String>,
    pub blinding_map: BTreeMap<String, Hidden>,
    pub created_at: DateTime<Utc>,
}

/// What a rater sees of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindedSample {
    pub session_id: String,
    pub item_id: String,
    /// 1-based position in the session order.
    pub position: usize,
    pub total: usize,
    pub source_sentences: Vec<String>,
    pub adapted_sentences: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextSample {
    Sample(BlindedSample),
    Complete { session_id: String, rated: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub n: usize,
    pub created_at: DateTime<Utc>,
}

/// Rater submission. Dimensions are optional here so a missing one gets a
/// precise error instead of a generic parse failure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RatingSubmission {
    pub session_id: String,
    pub rater_id: String,
    pub item_id: String,
    pub simplicity: Option<u8>,
    pub accuracy: Option<u8>,
    pub completeness: Option<u8>,
    pub brevity: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingAck {
    pub record_id: u64,
    pub item_id: String,
    pub timestamp: DateTime<Utc>,
}

/// One line of the ratings store: the evaluation ingest record plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRating {
    pub record_id: u64,
    pub session_id: String,
    pub item_id: String,
    #[serde(flatten)]
    pub rating: LikertRating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub session_id: String,
    pub total: usize,
    pub raters: BTreeMap<String, usize>,
    pub complete_raters: usize,
}

struct Store {
    file: File,
    path: PathBuf,
    /// (rater, item) pairs already rated.
    rated: HashSet<(String, String)>,
    /// session → rater → count.
    per_session: HashMap<String, BTreeMap<String, usize>>,
    next_id: u64,
}

pub struct RatingService {
    pool: Pool,
    sessions: RwLock<HashMap<String, Arc<RatingSession>>>,
    sessions_file: Mutex<(File, PathBuf)>,
    store: Mutex<Store>,
    counter: AtomicU64,
}

fn store_err(path: &Path) -> impl Fn(std::io::Error) -> ServiceError + '_ {
    move |e| ServiceError::Store { path: path.display().to_string(), message: e.to_string() }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, ServiceError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let reader = BufReader::new(File::open(path).map_err(store_err(path))?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(store_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| ServiceError::Store {
            path: path.display().to_string(),
            message: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(out)
}

fn append_line<T: Serialize>(file: &mut File, value: &T, path: &Path) -> Result<(), ServiceError> {
    let mut line = serde_json::to_vec(value).expect("record serializes");
    line.push(b'\n');
    file.write_all(&line).and_then(|_| file.flush()).map_err(store_err(path))
}

impl RatingService {
    /// Open (or create) `dir/sessions.jsonl` and `dir/ratings.jsonl`, replaying
    /// both to rebuild the in-memory index.
    pub fn open(pool: Pool, dir: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(store_err(dir))?;
        let sessions_path = dir.join("sessions.jsonl");
        let ratings_path = dir.join("ratings.jsonl");

        let sessions: HashMap<String, Arc<RatingSession>> =
            read_jsonl::<RatingSession>(&sessions_path)?.into_iter().map(|s| (s.session_id.clone(), Arc::new(s))).collect();
        let mut rated = HashSet::new();
        let mut per_session: HashMap<String, BTreeMap<String, usize>> = HashMap::new();
        let mut next_id = 1;
        for r in read_jsonl::<StoredRating>(&ratings_path)? {
            rated.insert((r.rating.rater_id.clone(), r.item_id.clone()));
            *per_session.entry(r.session_id.clone()).or_default().entry(r.rating.rater_id.clone()).or_default() += 1;
            next_id = next_id.max(r.record_id + 1);
        }
        let open = |p: &Path| OpenOptions::new().create(true).append(true).open(p).map_err(store_err(p));
        Ok(Self {
            pool,
            counter: AtomicU64::new(sessions.len() as u64),
            sessions: RwLock::new(sessions),
            sessions_file: Mutex::new((open(&sessions_path)?, sessions_path.clone())),
            store: Mutex::new(Store { file: open(&ratings_path)?, path: ratings_path, rated, per_session, next_id }),
        })
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    pub fn ratings_path(&self) -> PathBuf {
        self.store.lock().unwrap().path.clone()
    }

    pub fn session(&self, id: &str) -> Result<Arc<RatingSession>, ServiceError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Seeded uniform draw of `n` pool items without replacement.
    pub fn create_session(&self, n: usize, seed: u64) -> Result<SessionCreated, ServiceError> {
        if self.pool.is_empty() {
            return Err(ServiceError::EmptyPool);
        }
        if n == 0 {
            return Err(ServiceError::ZeroSamples);
        }
        let ids: Vec<&str> = self.pool.items.iter().map(|i| i.item_id.as_str()).collect();
        let drawn = select_qualitative_sample(&ids, n, seed).map_err(|_| ServiceError::TooLarge { n, pool: ids.len() })?;
        let item_ids: Vec<String> = drawn.into_iter().map(str::to_string).collect();
        let blinding_map = item_ids
            .iter()
            .map(|id| {
                let item = self.pool.get(id).expect("drawn from pool");
                (id.clone(), Hidden { sample_id: item.sample_id.clone(), system_id: item.system_id.clone() })
            })
            .collect();
        let k = self.counter.fetch_add(1, Ordering::SeqCst) + 1;
        let created_at = Utc::now();
        let session_id = format!("s{k}-{}", &hex::encode(Sha256::digest(format!("{seed}:{n}:{k}:{created_at}").as_bytes()))[..8]);
        let session = RatingSession { session_id: session_id.clone(), seed, item_ids, blinding_map, created_at };
        {
            let mut guard = self.sessions_file.lock().unwrap();
            let (file, path) = &mut *guard;
            append_line(file, &session, path)?;
        }
        self.sessions.write().unwrap().insert(session_id.clone(), Arc::new(session));
        Ok(SessionCreated { session_id, n, created_at })
    }

    /// The first item in session order this rater has not rated yet.
    pub fn next_sample(&self, session_id: &str, rater_id: &str) -> Result<NextSample, ServiceError> {
        if rater_id.trim().is_empty() {
            return Err(ServiceError::MissingRater);
        }
        let session = self.session(session_id)?;
        let store = self.store.lock().unwrap();
        let next = session.item_ids.iter().enumerate().find(|(_, id)| !store.rated.contains(&(rater_id.to_string(), (*id).clone())));
        let Some((pos, id)) = next else {
            return Ok(NextSample::Complete { session_id: session_id.to_string(), rated: session.item_ids.len() });
        };
        let item = self.pool.get(id).expect("session items come from the pool");
        Ok(NextSample::Sample(BlindedSample {
            session_id: session_id.to_string(),
            item_id: id.clone(),
            position: pos + 1,
            total: session.item_ids.len(),
            source_sentences: item.source_sentences.clone(),
            adapted_sentences: item.adapted_sentences.clone(),
        }))
    }

    /// Validate, then append under the single writer lock.
    pub fn submit_rating(&self, s: &RatingSubmission) -> Result<RatingAck, ServiceError> {
        if s.rater_id.trim().is_empty() {
            return Err(ServiceError::MissingRater);
        }
        let mut dims = [0u8; 4];
        for (slot, (name, v)) in dims.iter_mut().zip([
            ("simplicity", s.simplicity),
            ("accuracy", s.accuracy),
            ("completeness", s.completeness),
            ("brevity", s.brevity),
        ]) {
            let v = v.ok_or(ServiceError::MissingDimension(name))?;
            if !(1..=5).contains(&v) {
                return Err(ServiceError::OutOfRange { dimension: name, value: v });
            }
            *slot = v;
        }
        let session = self.session(&s.session_id)?;
        let hidden = session
            .blinding_map
            .get(&s.item_id)
            .ok_or_else(|| ServiceError::UnknownSample { session_id: s.session_id.clone(), item_id: s.item_id.clone() })?;

        let mut store = self.store.lock().unwrap();
        let key = (s.rater_id.clone(), s.item_id.clone());
        if store.rated.contains(&key) {
            return Err(ServiceError::Duplicate { rater_id: s.rater_id.clone(), item_id: s.item_id.clone() });
        }
        let timestamp = Utc::now();
        let record = StoredRating {
            record_id: store.next_id,
            session_id: s.session_id.clone(),
            item_id: s.item_id.clone(),
            rating: LikertRating {
                rater_id: s.rater_id.clone(),
                sample_id: hidden.sample_id.clone(),
                system_id_hidden: hidden.system_id.clone(),
                simplicity: dims[0],
                accuracy: dims[1],
                completeness: dims[2],
                brevity: dims[3],
                timestamp,
            },
        };
        let Store { file, path, .. } = &mut *store;
        append_line(file, &record, path)?;
        store.next_id += 1;
        store.rated.insert(key);
        *store.per_session.entry(s.session_id.clone()).or_default().entry(s.rater_id.clone()).or_default() += 1;
        Ok(RatingAck { record_id: record.record_id, item_id: s.item_id.clone(), timestamp })
    }

    pub fn progress(&self, session_id: &str) -> Result<Progress, ServiceError> {
        let session = self.session(session_id)?;
        let store = self.store.lock().unwrap();
        let raters = store.per_session.get(session_id).cloned().unwrap_or_default();
        let total = session.item_ids.len();
        let complete_raters = raters.values().filter(|c| **c >= total).count();
        Ok(Progress { session_id: session_id.to_string(), total, raters, complete_raters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pool(n: usize) -> Pool {
        Pool::from_items((0..n).map(|i| {
            let system = if i % 2 == 0 { "gpt-4o_baseline" } else { "gpt-4o-mini_ft" };
            (system.to_string(), format!("q/{}/1", i / 2), vec![format!("Source {i}.")], vec![format!("Plain {i}.")])
        }))
    }

    fn submission(session: &str, rater: &str, item: &str, v: [u8; 4]) -> RatingSubmission {
        RatingSubmission {
            session_id: session.into(),
            rater_id: rater.into(),
            item_id: item.into(),
            simplicity: Some(v[0]),
            accuracy: Some(v[1]),
            completeness: Some(v[2]),
            brevity: Some(v[3]),
        }
    }

    #[test]
    fn draw_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let svc = RatingService::open(pool(400), dir.path()).unwrap();
        let s = svc.create_session(40, 3).unwrap();
        let session = svc.session(&s.session_id).unwrap();
        assert_eq!(session.item_ids.iter().collect::<HashSet<_>>().len(), 40);
        let again = svc.create_session(40, 3).unwrap();
        assert_eq!(svc.session(&again.session_id).unwrap().item_ids, session.item_ids);
        assert_ne!(again.session_id, s.session_id);
        assert!(matches!(svc.create_session(401, 3), Err(ServiceError::TooLarge { .. })));
        let all = svc.create_session(400, 9).unwrap();
        assert_eq!(svc.session(&all.session_id).unwrap().item_ids.len(), 400);
    }

    #[test]
    fn empty_pool() {
        let dir = tempfile::tempdir().unwrap();
        let svc = RatingService::open(Pool::default(), dir.path()).unwrap();
        assert!(matches!(svc.create_session(1, 0), Err(ServiceError::EmptyPool)));
    }

    #[test]
    fn rate_through_session() {
        let dir = tempfile::tempdir().unwrap();
        let svc = RatingService::open(pool(10), dir.path()).unwrap();
        let s = svc.create_session(3, 1).unwrap();
        let order = svc.session(&s.session_id).unwrap().item_ids.clone();
        for (i, expected) in order.iter().enumerate() {
            let NextSample::Sample(b) = svc.next_sample(&s.session_id, "alice").unwrap() else { panic!() };
            assert_eq!(&b.item_id, expected);
            assert_eq!(b.position, i + 1);
            let ack = svc.submit_rating(&submission(&s.session_id, "alice", &b.item_id, [3, 4, 5, 2])).unwrap();
            assert_eq!(ack.record_id, i as u64 + 1);
        }
        assert!(matches!(svc.next_sample(&s.session_id, "alice").unwrap(), NextSample::Complete { .. }));
        let p = svc.progress(&s.session_id).unwrap();
        assert_eq!((p.total, p.complete_raters, p.raters["alice"]), (3, 1, 3));
    }

    #[test]
    fn invalid_submissions_persist_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let svc = RatingService::open(pool(4), dir.path()).unwrap();
        let s = svc.create_session(2, 1).unwrap();
        let item = svc.session(&s.session_id).unwrap().item_ids[0].clone();
        let err = svc.submit_rating(&submission(&s.session_id, "r", &item, [6, 1, 1, 1])).unwrap_err();
        assert_eq!(err.code(), "out_of_range");
        let mut missing = submission(&s.session_id, "r", &item, [1, 1, 1, 1]);
        missing.brevity = None;
        assert_eq!(svc.submit_rating(&missing).unwrap_err().code(), "missing_dimension");
        assert_eq!(svc.submit_rating(&submission(&s.session_id, "r", "nope", [1, 1, 1, 1])).unwrap_err().code(), "unknown_sample");
        assert_eq!(svc.submit_rating(&submission("nope", "r", &item, [1, 1, 1, 1])).unwrap_err().code(), "unknown_session");
        assert_eq!(std::fs::read_to_string(svc.ratings_path()).unwrap(), "");

        svc.submit_rating(&submission(&s.session_id, "r", &item, [1, 2, 3, 4])).unwrap();
        assert_eq!(svc.submit_rating(&submission(&s.session_id, "r", &item, [1, 2, 3, 4])).unwrap_err().code(), "duplicate");
        assert_eq!(std::fs::read_to_string(svc.ratings_path()).unwrap().lines().count(), 1);
    }

    #[test]
    fn replay_restores_state() {
        let dir = tempfile::tempdir().unwrap();
        let (sid, item) = {
            let svc = RatingService::open(pool(4), dir.path()).unwrap();
            let s = svc.create_session(2, 1).unwrap();
            let item = svc.session(&s.session_id).unwrap().item_ids[0].clone();
            svc.submit_rating(&submission(&s.session_id, "r", &item, [1, 2, 3, 4])).unwrap();
            (s.session_id, item)
        };
        let svc = RatingService::open(pool(4), dir.path()).unwrap();
        assert_eq!(svc.submit_rating(&submission(&sid, "r", &item, [1, 2, 3, 4])).unwrap_err().code(), "duplicate");
        let other = svc.session(&sid).unwrap().item_ids[1].clone();
        assert_eq!(svc.submit_rating(&submission(&sid, "r", &other, [1, 1, 1, 1])).unwrap().record_id, 2);
    }
}
