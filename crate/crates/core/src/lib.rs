//! Semi-rule-based compliance assessment for the GDPR and the EU AI Act.
//!
//! Regulations are split into chunks ranked by precedence. A model answers
//! narrow per-provision questions ("yes", "no", "not sure") or walks a
//! multi-select decision graph, and deterministic rules turn those answers
//! into a verdict together with the contextual factors the case left open.

pub mod engine;
pub mod evaluation;
pub mod graph;
pub mod label;
pub mod prompting;
pub mod regulation;
pub mod scalar;
pub mod structured;
pub mod tokens;

pub use engine::{
    aggregate_gdpr, assess_aiact, assess_gdpr, assess_gdpr_chunk, CaseRecord, ChunkStatus, ChunkVerdict,
    UnknownFactor, Verdict,
};
pub use graph::{AnswerMap, DecisionGraph, TraversalResult};
pub use label::{Domain, Label};
pub use regulation::{ChunkKind, ProvisionId, RegulationManifest};
pub use scalar::Scalar;
pub use structured::{ParseFailure, ParseFailureReason, TriState};

/// Exact rational scalar for metric oracles.
pub type Rational = num_rational::Ratio<i64>;

/// Metrics in floating point, as written to reports.
pub type MetricsReport = evaluation::MetricsReport<f64>;

/// Metrics computed exactly.
pub type ExactMetricsReport = evaluation::MetricsReport<Rational>;

pub type ImperfectStats = engine::ImperfectStats<f64>;
