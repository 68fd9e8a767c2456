//! Chat-completion client used by the compliance pipeline.
//!
//! Every completion is keyed by a SHA-256 digest of the model, the rendered
//! prompt and the generation knobs. Records are cached on disk, so a run made
//! with the mock or live backend can be replayed later with no backend at all.

pub mod backend;
pub mod cache;
pub mod client;
pub mod config;
pub mod record;
pub mod usage;

pub use backend::{Backend, BackendError, BackendReply, ChatRequest, LiveBackend, MockBackend};
pub use cache::{Cache, CacheStats};
pub use client::{LlmClient, LlmError};
pub use config::{BackendKind, BackoffPolicy, ConfigError, GenerationConfig};
pub use record::{prompt_hash, CompletionRecord};
pub use usage::{usage_report, TaggedRecord, UsageReport, UsageRow};
