use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{BackendError, BackendReply, ChatRequest};

/// One request/response exchange (one line of the transcript log).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub timestamp: DateTime<Utc>,
    pub request: ChatRequest,
    pub response: Option<BackendReply>,
    pub error: Option<BackendError>,
    /// Retries already spent on this request before this exchange.
    pub retries: u32,
    pub latency_ms: u64,
}

struct Inner {
    entries: Vec<TranscriptEntry>,
    sink: Option<BufWriter<File>>,
    write_error: Option<String>,
}

/// Append-only, serialized log of every exchange.
pub struct Transcript {
    inner: Mutex<Inner>,
}

impl Transcript {
    pub fn in_memory() -> Self {
        Self { inner: Mutex::new(Inner { entries: Vec::new(), sink: None, write_error: None }) }
    }

    /// Also append each exchange as a JSON line to `path`.
    pub fn to_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self { inner: Mutex::new(Inner { entries: Vec::new(), sink: Some(BufWriter::new(file)), write_error: None }) })
    }

    pub(super) fn record(&self, request: &ChatRequest, outcome: &Result<BackendReply, BackendError>, retries: u32, latency_ms: u64) {
        let mut inner = self.inner.lock().unwrap();
        let entry = TranscriptEntry {
            seq: inner.entries.len() as u64,
            timestamp: Utc::now(),
            request: request.clone(),
            response: outcome.as_ref().ok().cloned(),
            error: outcome.as_ref().err().cloned(),
            retries,
            latency_ms,
        };
        if let Some(sink) = inner.sink.as_mut() {
            let written = serde_json::to_writer(&mut *sink, &entry)
                .map_err(|e| e.to_string())
                .and_then(|_| sink.write_all(b"\n").map_err(|e| e.to_string()))
                .and_then(|_| sink.flush().map_err(|e| e.to_string()));
            if let Err(e) = written {
                log::error!("transcript write failed: {e}");
                inner.write_error.get_or_insert(e);
            }
        }
        inner.entries.push(entry);
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.inner.lock().unwrap().entries.clone()
    }

    /// First error hit while writing the file sink, if any.
    pub fn write_error(&self) -> Option<String> {
        self.inner.lock().unwrap().write_error.clone()
    }
}
