//! Chat-completions gateway: request types, retry with exponential backoff,
//! a bounded number of in-flight requests, and an exchange transcript.
//!
//! Backends are pluggable. [`mock`] provides deterministic offline backends;
//! the `http` feature adds a live chat-completions transport.

mod backoff;
pub mod finetune;
#[cfg(feature = "http")]
pub mod http;
pub mod mock;
mod transcript;

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backoff::RetryPolicy;
pub use transcript::{Transcript, TranscriptEntry};

/// Environment variable holding the provider API key.
pub const API_KEY_ENV: &str = "PLAINLANG_API_KEY";
/// Environment variable overriding the chat-completions endpoint.
pub const API_BASE_ENV: &str = "PLAINLANG_API_BASE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_retries: u32,
    #[serde(with = "duration_ms", rename = "timeout_ms")]
    pub timeout: Duration,
}

impl ChatRequest {
    pub fn new(model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self {
            model: model.into(),
            messages,
            temperature: 0.0,
            max_retries: RetryPolicy::default().max_retries,
            timeout: Duration::from_secs(120),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.model.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("empty model identifier".into()));
        }
        if self.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("no messages".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(GatewayError::InvalidRequest(format!("temperature {} is negative", self.temperature)));
        }
        if self.messages.iter().skip(1).any(|m| m.role == Role::System) {
            return Err(GatewayError::InvalidRequest("a system message may only open the conversation".into()));
        }
        if let Some(i) = self
            .messages
            .iter()
            .position(|m| m.role != Role::Assistant && m.content.trim().is_empty())
        {
            return Err(GatewayError::InvalidRequest(format!("message {i} has empty content")));
        }
        Ok(())
    }
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// What a backend returns for one successful exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendReply {
    pub content: String,
    #[serde(default)]
    pub usage: Option<Usage>,
}

impl From<&str> for BackendReply {
    fn from(s: &str) -> Self {
        Self { content: s.to_string(), usage: None }
    }
}

impl From<String> for BackendReply {
    fn from(content: String) -> Self {
        Self { content, usage: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub usage: Option<Usage>,
    /// Transport-level retries spent on this call.
    pub retry_count: u32,
    pub latency_ms: u64,
}

/// Failure of a single exchange, classified for the retry loop.
#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum BackendError {
    #[error("rate limited")]
    RateLimited,
    #[error("server error {status}: {message}")]
    Server { status: u16, message: String },
    #[error("timed out")]
    Timeout,
    #[error("network error: {0}")]
    Network(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("provider rejected the request ({status}): {message}")]
    Provider { status: u16, message: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
}

impl BackendError {
    pub fn is_transient(&self) -> bool {
        matches!(self, Self::RateLimited | Self::Server { .. } | Self::Timeout | Self::Network(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("retries exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: BackendError },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("provider error: {0}")]
    Provider(BackendError),
}

impl GatewayError {
    /// True for failures of the network path rather than of the request itself.
    pub fn is_network(&self) -> bool {
        matches!(self, Self::RetriesExhausted { .. } | Self::Auth(_) | Self::Malformed(_) | Self::Provider(_))
    }
}

/// A chat-completions provider.
pub trait Backend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError>;

    /// Short label recorded in run manifests.
    fn name(&self) -> &str {
        "backend"
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        (**self).complete(request)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        (**self).complete(request)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Waits between retries. Swappable so tests never sleep.
pub trait Sleeper: Send + Sync {
    fn sleep(&self, duration: Duration);
}

pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Records requested delays without waiting.
#[derive(Default)]
pub struct RecordingSleeper {
    delays: Mutex<Vec<Duration>>,
}

impl RecordingSleeper {
    pub fn delays(&self) -> Vec<Duration> {
        self.delays.lock().unwrap().clone()
    }
}

impl Sleeper for RecordingSleeper {
    fn sleep(&self, duration: Duration) {
        self.delays.lock().unwrap().push(duration);
    }
}

impl<S: Sleeper + ?Sized> Sleeper for std::sync::Arc<S> {
    fn sleep(&self, duration: Duration) {
        (**self).sleep(duration);
    }
}

/// Counting semaphore over a mutex and condvar.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(permits: usize) -> Self {
        Self { permits: Mutex::new(permits.max(1)), available: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.permits.lock().unwrap();
        while *n == 0 {
            n = self.available.wait(n).unwrap();
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap() += 1;
        self.0.available.notify_one();
    }
}

pub const DEFAULT_CONCURRENCY: usize = 4;

pub struct Gateway {
    backend: Box<dyn Backend>,
    policy: RetryPolicy,
    sleeper: Box<dyn Sleeper>,
    transcript: Transcript,
    in_flight: Semaphore,
    concurrency: usize,
    jitter_rng: Mutex<ChaCha8Rng>,
}

impl Gateway {
    pub fn new(backend: impl Backend + 'static) -> Self {
        Self {
            backend: Box::new(backend),
            policy: RetryPolicy::default(),
            sleeper: Box::new(ThreadSleeper),
            transcript: Transcript::in_memory(),
            in_flight: Semaphore::new(DEFAULT_CONCURRENCY),
            concurrency: DEFAULT_CONCURRENCY,
            jitter_rng: Mutex::new(ChaCha8Rng::seed_from_u64(0)),
        }
    }

    pub fn with_policy(mut self, policy: RetryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_sleeper(mut self, sleeper: impl Sleeper + 'static) -> Self {
        self.sleeper = Box::new(sleeper);
        self
    }

    pub fn with_transcript(mut self, transcript: Transcript) -> Self {
        self.transcript = transcript;
        self
    }

    pub fn with_concurrency(mut self, permits: usize) -> Self {
        self.in_flight = Semaphore::new(permits);
        self.concurrency = permits.max(1);
        self
    }

    pub fn with_jitter_seed(self, seed: u64) -> Self {
        *self.jitter_rng.lock().unwrap() = ChaCha8Rng::seed_from_u64(seed);
        self
    }

    pub fn policy(&self) -> &RetryPolicy {
        &self.policy
    }

    pub fn concurrency(&self) -> usize {
        self.concurrency
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    /// Send one request, retrying transient failures with exponential backoff.
    pub fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        request.validate()?;
        let _permit = self.in_flight.acquire();
        let started = Instant::now();
        let mut previous_delay = Duration::ZERO;
        let mut retries = 0u32;
        loop {
            let attempt_start = Instant::now();
            let outcome = self.backend.complete(request);
            let latency_ms = attempt_start.elapsed().as_millis() as u64;
            self.transcript.record(request, &outcome, retries, latency_ms);
            match outcome {
                Ok(reply) => {
                    return Ok(ChatResponse {
                        content: reply.content,
                        usage: reply.usage,
                        retry_count: retries,
                        latency_ms: started.elapsed().as_millis() as u64,
                    })
                }
                Err(BackendError::Auth(m)) => return Err(GatewayError::Auth(m)),
                Err(BackendError::Malformed(m)) => return Err(GatewayError::Malformed(m)),
                Err(e) if !e.is_transient() => return Err(GatewayError::Provider(e)),
                Err(e) => {
                    if retries >= request.max_retries {
                        return Err(GatewayError::RetriesExhausted { attempts: retries + 1, last: e });
                    }
                    let delay = {
                        let mut rng = self.jitter_rng.lock().unwrap();
                        self.policy.delay(retries, previous_delay, &mut *rng)
                    };
                    log::debug!("transient failure ({e}); retry {} in {:?}", retries + 1, delay);
                    self.sleeper.sleep(delay);
                    previous_delay = delay;
                    retries += 1;
                }
            }
        }
    }
}
