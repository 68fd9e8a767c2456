use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use compliance_core::prompting::SchemaDescriptor;
use serde_json::{json, Value};
use thiserror::Error;

/// What a backend receives for one call.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub seed: u64,
    pub max_new_tokens: u32,
    /// Shape the caller will parse the reply against, if known.
    pub schema: Option<SchemaDescriptor>,
    pub prompt_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendReply {
    pub text: String,
    pub input_tokens: Option<u64>,
    pub output_tokens: Option<u64>,
    pub seed_honored: Option<bool>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BackendError {
    /// Worth retrying: timeouts, rate limits, server errors.
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Permanent(String),
}

/// A provider adapter: chat request in, text and usage out.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn call(&self, request: &ChatRequest) -> Result<BackendReply, BackendError>;
}

type Responder = dyn Fn(&ChatRequest) -> Result<String, BackendError> + Send + Sync;

/// Offline backend answering from a function of the request.
#[derive(Clone)]
pub struct MockBackend {
    responder: Arc<Responder>,
}

impl MockBackend {
    pub fn new(responder: impl Fn(&ChatRequest) -> Result<String, BackendError> + Send + Sync + 'static) -> Self {
        Self { responder: Arc::new(responder) }
    }

    /// Always replies with `text`.
    pub fn canned(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::new(move |_| Ok(text.clone()))
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn call(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        let text = (self.responder)(request)?;
        Ok(BackendReply { text, input_tokens: None, output_tokens: None, seed_honored: Some(true) })
    }
}

/// OpenAI-compatible `/chat/completions` adapter.
///
/// Credentials come from the environment only: `LLM_API_KEY`, and optionally
/// `LLM_BASE_URL` (default `https://api.openai.com/v1`).
pub struct LiveBackend {
    http: reqwest::blocking::Client,
    base_url: String,
    api_key: Option<String>,
    send_seed: bool,
    network_calls: AtomicU64,
}

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

impl LiveBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Permanent(format!("http client: {e}")))?;
        Ok(Self {
            http,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            send_seed: true,
            network_calls: AtomicU64::new(0),
        })
    }

    pub fn from_env() -> Result<Self, BackendError> {
        let base = std::env::var("LLM_BASE_URL").unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        let key = std::env::var("LLM_API_KEY").ok().filter(|k| !k.is_empty());
        if key.is_none() && base == DEFAULT_BASE_URL {
            return Err(BackendError::Permanent("LLM_API_KEY is not set".into()));
        }
        Self::new(base, key, Duration::from_secs(120))
    }

    /// Providers that reject the `seed` parameter need it left out.
    pub fn without_seed(mut self) -> Self {
        self.send_seed = false;
        self
    }

    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::SeqCst)
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let mut body = json!({
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_new_tokens,
        });
        if self.send_seed {
            body["seed"] = json!(request.seed);
        }
        body
    }
}

fn parse_reply(body: &Value, send_seed: bool) -> Result<BackendReply, BackendError> {
    let text = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Permanent("response has no choices[0].message.content".into()))?;
    let usage = |k: &str| body.get("usage").and_then(|u| u.get(k)).and_then(Value::as_u64);
    Ok(BackendReply {
        text: text.to_string(),
        input_tokens: usage("prompt_tokens"),
        output_tokens: usage("completion_tokens"),
        seed_honored: if send_seed { None } else { Some(false) },
    })
}

impl Backend for LiveBackend {
    fn name(&self) -> &str {
        "live"
    }

    fn call(&self, request: &ChatRequest) -> Result<BackendReply, BackendError> {
        self.network_calls.fetch_add(1, Ordering::SeqCst);
        let mut req = self.http.post(format!("{}/chat/completions", self.base_url)).json(&self.body(request));
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| BackendError::Transient(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| BackendError::Transient(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let snippet: String = text.chars().take(200).collect();
            return Err(BackendError::Permanent(format!("HTTP {status}: {snippet}")));
        }
        let body: Value =
            serde_json::from_str(&text).map_err(|e| BackendError::Permanent(format!("invalid JSON body: {e}")))?;
        parse_reply(&body, self.send_seed)
    }
}
