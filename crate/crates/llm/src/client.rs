use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use compliance_core::prompting::{PromptRequest, SchemaDescriptor};
use compliance_core::tokens::count_tokens;
use thiserror::Error;

use crate::backend::{Backend, BackendError, ChatRequest};
use crate::cache::Cache;
use crate::config::{BackendKind, BackoffPolicy, ConfigError, GenerationConfig};
use crate::record::{prompt_hash, CompletionRecord};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("replay miss: no cached completion for prompt {prompt_hash}")]
    ReplayMiss { prompt_hash: String },
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("provider rejected the request: {0}")]
    Provider(String),
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
}

/// Counting semaphore bounding in-flight backend calls.
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn new(n: usize) -> Self {
        Self { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Spaces calls at least `interval` apart.
struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    fn wait(&self) {
        let sleep_until = {
            let mut next = self.next.lock().unwrap();
            let now = Instant::now();
            let at = next.map_or(now, |n| n.max(now));
            *next = Some(at + self.interval);
            at
        };
        let now = Instant::now();
        if sleep_until > now {
            std::thread::sleep(sleep_until - now);
        }
    }
}

/// Cache-first completion client.
///
/// In replay mode there is no backend: every prompt must already be cached,
/// and a miss is an error naming the prompt hash.
pub struct LlmClient {
    kind: BackendKind,
    backend: Option<Arc<dyn Backend>>,
    cache: Option<Cache>,
    backoff: BackoffPolicy,
    limiter: Option<RateLimiter>,
    slots: Slots,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
}

impl LlmClient {
    pub fn replay(cache: Cache) -> Self {
        Self::build(BackendKind::Replay, None, Some(cache))
    }

    pub fn mock(backend: impl Backend + 'static, cache: Option<Cache>) -> Self {
        Self::build(BackendKind::Mock, Some(Arc::new(backend)), cache)
    }

    pub fn live(backend: impl Backend + 'static, cache: Option<Cache>) -> Self {
        Self::build(BackendKind::Live, Some(Arc::new(backend)), cache)
    }

    fn build(kind: BackendKind, backend: Option<Arc<dyn Backend>>, cache: Option<Cache>) -> Self {
        Self {
            kind,
            backend,
            cache,
            backoff: BackoffPolicy::default(),
            limiter: None,
            slots: Slots::new(8),
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn with_backoff(mut self, backoff: BackoffPolicy) -> Self {
        self.backoff = backoff;
        self
    }

    /// Caps calls per second; `0` disables the limiter.
    pub fn with_rate_limit(mut self, per_second: f64) -> Self {
        self.limiter = (per_second > 0.0)
            .then(|| RateLimiter { interval: Duration::from_secs_f64(1.0 / per_second), next: Mutex::new(None) });
        self
    }

    pub fn with_concurrency(mut self, cap: usize) -> Self {
        self.slots = Slots::new(cap);
        self
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn cache(&self) -> Option<&Cache> {
        self.cache.as_ref()
    }

    /// Calls that reached the backend, retries included.
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::SeqCst)
    }

    pub fn complete(&self, prompt: &PromptRequest, config: &GenerationConfig) -> Result<CompletionRecord, LlmError> {
        self.complete_text(&prompt.rendered_text, Some(&prompt.expected_schema), config)
    }

    pub fn complete_text(
        &self,
        prompt: &str,
        schema: Option<&SchemaDescriptor>,
        config: &GenerationConfig,
    ) -> Result<CompletionRecord, LlmError> {
        config.validate()?;
        let hash = prompt_hash(prompt, config);
        if let Some(cache) = &self.cache {
            if let Some(record) = cache.get(&hash)? {
                self.cache_hits.fetch_add(1, Ordering::SeqCst);
                return Ok(record);
            }
        }
        let Some(backend) = &self.backend else {
            return Err(LlmError::ReplayMiss { prompt_hash: hash });
        };
        let request = ChatRequest {
            model: config.model.clone(),
            prompt: prompt.to_string(),
            temperature: config.temperature,
            seed: config.seed,
            max_new_tokens: config.max_new_tokens,
            schema: schema.cloned(),
            prompt_hash: hash,
        };
        let _slot = self.slots.acquire();
        let mut rng = rand::thread_rng();
        let max_attempts = config.max_retries + 1;
        for attempt in 1..=max_attempts {
            if let Some(l) = &self.limiter {
                l.wait();
            }
            self.backend_calls.fetch_add(1, Ordering::SeqCst);
            match backend.call(&request) {
                Ok(reply) => {
                    let estimated = reply.input_tokens.is_none() || reply.output_tokens.is_none();
                    let record = CompletionRecord {
                        prompt_hash: request.prompt_hash.clone(),
                        model: config.model.clone(),
                        input_tokens: reply.input_tokens.unwrap_or_else(|| count_tokens(prompt) as u64),
                        output_tokens: reply.output_tokens.unwrap_or_else(|| count_tokens(&reply.text) as u64),
                        response_text: reply.text,
                        attempt,
                        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                        estimated,
                        seed_honored: reply.seed_honored,
                    };
                    if let Some(cache) = &self.cache {
                        cache.put(&record)?;
                    }
                    return Ok(record);
                }
                Err(BackendError::Permanent(m)) => return Err(LlmError::Provider(m)),
                Err(BackendError::Transient(m)) => {
                    if attempt == max_attempts {
                        return Err(LlmError::Transport { attempts: attempt, message: m });
                    }
                    std::thread::sleep(self.backoff.delay(attempt, &mut rng));
                }
            }
        }
        unreachable!("loop returns on the last attempt")
    }
}
