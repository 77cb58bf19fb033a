//! Live chat-completions transport over blocking HTTP.

use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::finetune::FinetuneJobPayload;
use super::{Backend, BackendError, BackendReply, ChatRequest, Usage, API_BASE_ENV, API_KEY_ENV};

pub const DEFAULT_API_BASE: &str = "https://api.openai.com/v1";

pub struct HttpBackend {
    base_url: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .connect_timeout(Duration::from_secs(20))
            .build()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(Self { base_url: base_url.into().trim_end_matches('/').to_string(), api_key: api_key.into(), client })
    }

    /// Endpoint from `PLAINLANG_API_BASE` (default OpenAI), key from `PLAINLANG_API_KEY`.
    pub fn from_env() -> Result<Self, BackendError> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| BackendError::Auth(format!("{API_KEY_ENV} is not set")))?;
        let base = std::env::var(API_BASE_ENV).unwrap_or_else(|_| DEFAULT_API_BASE.to_string());
        Self::new(base, key)
    }

    fn post(&self, path: &str, body: &Value, timeout: Duration) -> Result<Value, BackendError> {
        let response = self
            .client
            .post(format!("{}/{path}", self.base_url))
            .bearer_auth(&self.api_key)
            .timeout(timeout)
            .json(body)
            .send()
            .map_err(classify_transport)?;
        read_json(response)
    }

    /// Submit a fine-tuning job; `training_file`/`validation_file` in the payload
    /// must already be provider file ids.
    pub fn submit_finetune_job(&self, payload: &FinetuneJobPayload) -> Result<FinetuneSubmission, BackendError> {
        let body = serde_json::to_value(payload).map_err(|e| BackendError::Malformed(e.to_string()))?;
        let value = self.post("fine_tuning/jobs", &body, Duration::from_secs(60))?;
        parse_submission(&value)
    }

    pub fn finetune_job_status(&self, job_id: &str) -> Result<FinetuneSubmission, BackendError> {
        let response = self
            .client
            .get(format!("{}/fine_tuning/jobs/{job_id}", self.base_url))
            .bearer_auth(&self.api_key)
            .timeout(Duration::from_secs(60))
            .send()
            .map_err(classify_transport)?;
        parse_submission(&read_json(response)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, Deserialize)]
pub struct FinetuneSubmission {
    pub job_id: String,
    pub status: String,
    #[serde(default)]
    pub fine_tuned_model: Option<String>,
}

fn parse_submission(value: &Value) -> Result<FinetuneSubmission, BackendError> {
    let job_id = value.get("id").and_then(Value::as_str).ok_or_else(|| BackendError::Malformed("job response without id".into()))?;
    Ok(FinetuneSubmission {
        job_id: job_id.to_string(),
        status: value.get("status").and_then(Value::as_str).unwrap_or("unknown").to_string(),
        fine_tuned_model: value.get("fine_tuned_model").and_then(Value::as_str).map(str::to_string),
    })
}

fn classify_transport(e: reqwest::Error) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout
    } else {
        BackendError::Network(e.to_string())
    }
}

fn read_json(response: reqwest::blocking::Response) -> Result<Value, BackendError> {
    let status = response.status().as_u16();
    let text = response.text().map_err(classify_transport)?;
    if let Some(err) = classify_status(status, &text) {
        return Err(err);
    }
    serde_json::from_str(&text).map_err(|e| BackendError::Malformed(format!("invalid JSON body: {e}")))
}

/// Map an HTTP status onto the retry classes.
pub fn classify_status(status: u16, body: &str) -> Option<BackendError> {
    let message = || {
        serde_json::from_str::<Value>(body)
            .ok()
            .and_then(|v| v.pointer("/error/message").and_then(Value::as_str).map(str::to_string))
            .unwrap_or_else(|| body.chars().take(300).collect())
    };
    match status {
        200..=299 => None,
        401 | 403 => Some(BackendError::Auth(message())),
        408 => Some(BackendError::Timeout),
        429 => Some(BackendError::RateLimited),
        500..=599 => Some(BackendError::Server { status, message: message() }),
        _ => Some(BackendError::Provider { status, message: message() }),
    }
}

/// Extract the first choice's message content from a chat-completions body.
pub fn parse_chat_response(value: &Value) -> Result<BackendReply, BackendError> {
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Malformed("missing choices[0].message.content".into()))?;
    let usage = value.get("usage").and_then(|u| {
        Some(Usage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
            completion_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    Ok(BackendReply { content: content.to_string(), usage })
}

pub fn chat_request_body(request: &ChatRequest) -> Value {
    json!({
        "model": request.model,
        "messages": request.messages,
        "temperature": request.temperature,
    })
}

impl Backend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        let value = self.post("chat/completions", &chat_request_body(request), request.timeout)?;
        parse_chat_response(&value)
    }

    fn name(&self) -> &str {
        "http"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm_gateway::ChatMessage;

    #[test]
    fn status_classes() {
        assert_eq!(classify_status(200, ""), None);
        assert!(matches!(classify_status(401, r#"{"error":{"message":"bad key"}}"#), Some(BackendError::Auth(m)) if m == "bad key"));
        assert_eq!(classify_status(429, ""), Some(BackendError::RateLimited));
        assert!(classify_status(503, "").unwrap().is_transient());
        assert!(!classify_status(404, "model not found").unwrap().is_transient());
    }

    #[test]
    fn chat_body_shape() {
        let req = ChatRequest::new("gpt-4o", vec![ChatMessage::system("s"), ChatMessage::user("u")]);
        let body = chat_request_body(&req);
        assert_eq!(body["model"], "gpt-4o");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn response_parsing() {
        let v = json!({"choices": [{"message": {"role": "assistant", "content": "[\"a\"]"}}], "usage": {"prompt_tokens": 5, "completion_tokens": 2}});
        let reply = parse_chat_response(&v).unwrap();
        assert_eq!(reply.content, "[\"a\"]");
        assert_eq!(reply.usage, Some(Usage { prompt_tokens: 5, completion_tokens: 2 }));
        assert!(matches!(parse_chat_response(&json!({"choices": []})), Err(BackendError::Malformed(_))));
    }

    #[test]
    fn connection_refused_is_transient() {
        let backend = HttpBackend::new("http://127.0.0.1:9", "k").unwrap();
        let mut req = ChatRequest::new("m", vec![ChatMessage::user("u")]);
        req.timeout = Duration::from_millis(500);
        let err = backend.complete(&req).unwrap_err();
        assert!(err.is_transient(), "{err:?}");
    }
}
