use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("max_new_tokens must be at least 1")]
    ZeroMaxTokens,
    #[error("temperature must be a finite non-negative number")]
    BadTemperature,
    #[error("model name is empty")]
    EmptyModel,
    #[error("unknown backend {0:?}; expected live, replay or mock")]
    UnknownBackend(String),
}

/// Sampling settings sent with every request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub model: String,
    pub temperature: f64,
    pub seed: u64,
    pub max_new_tokens: u32,
    pub max_retries: u32,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self { model: "gpt-4o-mini".into(), temperature: 0.0, seed: 42, max_new_tokens: 1024, max_retries: 3 }
    }
}

impl GenerationConfig {
    pub fn with_model(model: impl Into<String>) -> Self {
        Self { model: model.into(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.model.trim().is_empty() {
            return Err(ConfigError::EmptyModel);
        }
        if self.max_new_tokens == 0 {
            return Err(ConfigError::ZeroMaxTokens);
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(ConfigError::BadTemperature);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
    Mock,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
            BackendKind::Mock => "mock",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Ok(BackendKind::Live),
            "replay" => Ok(BackendKind::Replay),
            "mock" => Ok(BackendKind::Mock),
            _ => Err(ConfigError::UnknownBackend(s.to_string())),
        }
    }
}

/// Exponential backoff: `base * factor^(retry-1)`, capped, then scaled by a
/// random factor in `[1 - jitter, 1 + jitter]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffPolicy {
    pub base: Duration,
    pub factor: f64,
    pub jitter: f64,
    pub max: Duration,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        Self { base: Duration::from_secs(1), factor: 2.0, jitter: 0.25, max: Duration::from_secs(30) }
    }
}

impl BackoffPolicy {
    pub const NONE: BackoffPolicy =
        BackoffPolicy { base: Duration::ZERO, factor: 1.0, jitter: 0.0, max: Duration::ZERO };

    /// Nominal delay before retry number `retry` (1-based), without jitter.
    pub fn nominal(&self, retry: u32) -> Duration {
        let exp = self.factor.powi(retry.saturating_sub(1) as i32);
        let secs = (self.base.as_secs_f64() * exp).min(self.max.as_secs_f64());
        Duration::from_secs_f64(secs.max(0.0))
    }

    pub fn delay(&self, retry: u32, rng: &mut impl rand::Rng) -> Duration {
        let nominal = self.nominal(retry);
        if self.jitter <= 0.0 || nominal.is_zero() {
            return nominal;
        }
        let scale = rng.gen_range((1.0 - self.jitter).max(0.0)..=1.0 + self.jitter);
        nominal.mul_f64(scale)
    }
}
