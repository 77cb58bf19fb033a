//! Offline backends. Every backend here except [`ScriptedBackend`] is a pure
//! function of the full message list.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, BackendReply, ChatMessage, ChatRequest, Role};

/// Hex SHA-256 of the canonical JSON encoding of a message list.
pub fn message_digest(messages: &[ChatMessage]) -> String {
    let bytes = serde_json::to_vec(messages).expect("messages serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// The most recent user message whose whole content is a JSON array of strings.
pub fn last_sentence_list(messages: &[ChatMessage]) -> Option<Vec<String>> {
    messages
        .iter()
        .rev()
        .filter(|m| m.role == Role::User)
        .find_map(|m| serde_json::from_str::<Vec<String>>(m.content.trim()).ok())
}

/// Render a sentence list the way the prompts describe it: `["A", "B"]`.
pub fn format_list<S: AsRef<str>>(items: &[S]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| serde_json::to_string(s.as_ref()).expect("string")).collect();
    format!("[{}]", quoted.join(", "))
}

const QUESTION_BANK: &[&str] = &[
    "Could this sentence be made simpler for someone who doesn't know any medical terms?",
    "Is there any important information left out that should be added to make this clearer?",
    "Is there a shorter way to say this without losing the important details?",
    "Does this part make sense if someone has no background in health or medicine?",
    "Is there any medical jargon or abbreviation here that should be explained or replaced with simpler words?",
    "What does this word mean in everyday language?",
    "Can you say who did the study in simpler words?",
    "Why does this result matter for patients?",
];

/// Canned replies keyed by [`message_digest`].
#[derive(Default)]
pub struct MockBackend {
    replies: HashMap<String, String>,
    fallback_echo: bool,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, messages: &[ChatMessage], reply: impl Into<String>) {
        self.replies.insert(message_digest(messages), reply.into());
    }

    pub fn insert_digest(&mut self, digest: impl Into<String>, reply: impl Into<String>) {
        self.replies.insert(digest.into(), reply.into());
    }

    /// Answer unknown prompts like [`EchoBackend`] instead of failing.
    pub fn with_echo_fallback(mut self) -> Self {
        self.fallback_echo = true;
        self
    }

    pub fn from_map(replies: HashMap<String, String>) -> Self {
        Self { replies, fallback_echo: false }
    }
}

impl Backend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        match self.replies.get(&message_digest(&request.messages)) {
            Some(reply) => Ok(reply.as_str().into()),
            None if self.fallback_echo => EchoBackend.complete(request),
            None => Err(BackendError::Provider { status: 404, message: "no canned reply for this prompt".into() }),
        }
    }

    fn name(&self) -> &str {
        "mock-canned"
    }
}

/// Echoes the latest sentence list back; answers list-free prompts (the
/// critic) with a fixed set of questions.
pub struct EchoBackend;

impl Backend for EchoBackend {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        match last_sentence_list(&request.messages) {
            Some(list) => Ok(format_list(&list).into()),
            None => Ok(QUESTION_BANK[..3].iter().map(|q| format!("- {q}")).collect::<Vec<_>>().join("\n").into()),
        }
    }

    fn name(&self) -> &str {
        "mock-echo"
    }
}

/// Plays back a fixed sequence of outcomes, one per call.
pub struct ScriptedBackend {
    script: Mutex<VecDeque<Result<BackendReply, BackendError>>>,
    repeat_last: Option<Result<BackendReply, BackendError>>,
}

impl ScriptedBackend {
    pub fn new(script: Vec<Result<BackendReply, BackendError>>) -> Self {
        Self { script: Mutex::new(script.into()), repeat_last: None }
    }

    pub fn replies<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self::new(replies.into_iter().map(|r| Ok(BackendReply::from(r.into()))).collect())
    }

    /// Always return the same outcome.
    pub fn repeating(outcome: Result<BackendReply, BackendError>) -> Self {
        Self { script: Mutex::new(VecDeque::new()), repeat_last: Some(outcome) }
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().unwrap().len()
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, _request: &ChatRequest) -> Result<BackendReply, BackendError> {
        if let Some(next) = self.script.lock().unwrap().pop_front() {
            return next;
        }
        self.repeat_last
            .clone()
            .unwrap_or_else(|| Err(BackendError::Provider { status: 410, message: "script exhausted".into() }))
    }

    fn name(&self) -> &str {
        "mock-scripted"
    }
}

/// Seeded misbehaving model: replies are drawn from a generator keyed by the
/// message digest, so the same conversation always gets the same reply while
/// a corrective follow-up gets a fresh draw.
#[derive(Debug, Clone)]
pub struct RandomizedBackend {
    pub seed: u64,
    /// Probability of an unparseable reply.
    pub malformed_rate: f64,
    /// Probability of a list with the wrong number of entries.
    pub wrong_length_rate: f64,
    /// Probability of wrapping a valid reply in a code fence with prose.
    pub fenced_rate: f64,
    /// Probability of omitting any given sentence ("").
    pub omission_rate: f64,
    /// Maximum number of critic questions (may exceed 5 to exercise truncation).
    pub max_questions: usize,
}

impl Default for RandomizedBackend {
    fn default() -> Self {
        Self { seed: 0, malformed_rate: 0.15, wrong_length_rate: 0.15, fenced_rate: 0.2, omission_rate: 0.1, max_questions: 8 }
    }
}

impl RandomizedBackend {
    fn rng_for(&self, messages: &[ChatMessage]) -> ChaCha8Rng {
        let digest = Sha256::digest(message_digest(messages).as_bytes());
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        for (i, b) in self.seed.to_le_bytes().iter().enumerate() {
            seed[i] ^= b;
        }
        ChaCha8Rng::from_seed(seed)
    }
}

impl Backend for RandomizedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        let mut rng = self.rng_for(&request.messages);
        let Some(list) = last_sentence_list(&request.messages) else {
            let n = rng.random_range(0..=self.max_questions);
            let questions: Vec<String> = (0..n).map(|i| format!("{}. {}", i + 1, QUESTION_BANK[i % QUESTION_BANK.len()])).collect();
            return Ok(questions.join("\n").into());
        };
        let roll: f64 = rng.random();
        if roll < self.malformed_rate {
            let junk = ["Sure! Here are the adaptations:", "[\"unterminated", "{\"adaptations\": 3}", ""];
            return Ok(junk[rng.random_range(0..junk.len())].into());
        }
        let mut adapted: Vec<String> = list
            .iter()
            .map(|s| if rng.random_bool(self.omission_rate) { String::new() } else { format!("Plain: {s}") })
            .collect();
        if roll < self.malformed_rate + self.wrong_length_rate {
            if adapted.len() > 1 && rng.random_bool(0.5) {
                adapted.pop();
            } else {
                adapted.push("Extra sentence.".into());
            }
        }
        let body = format_list(&adapted);
        if rng.random_bool(self.fenced_rate) {
            Ok(format!("Here is the list:\n```json\n{body}\n```\nLet me know if you need more.").into())
        } else {
            Ok(body.into())
        }
    }

    fn name(&self) -> &str {
        "mock-randomized"
    }
}
