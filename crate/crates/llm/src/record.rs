use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::GenerationConfig;

/// One completed chat call, as stored in the cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub prompt_hash: String,
    pub model: String,
    pub response_text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    /// 1-based attempt that produced the response.
    pub attempt: u32,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// Token counts were approximated locally because the provider sent none.
    #[serde(default)]
    pub estimated: bool,
    /// Whether the provider is known to have applied the seed; `None` if unknown.
    #[serde(default)]
    pub seed_honored: Option<bool>,
}

/// Hex SHA-256 over the model, the prompt and every knob that can change the
/// response. `max_retries` is excluded since it cannot.
pub fn prompt_hash(prompt: &str, config: &GenerationConfig) -> String {
    let key = serde_json::json!({
        "model": config.model,
        "prompt": prompt,
        "temperature": config.temperature,
        "seed": config.seed,
        "max_new_tokens": config.max_new_tokens,
    });
    hex::encode(Sha256::digest(key.to_string().as_bytes()))
}
