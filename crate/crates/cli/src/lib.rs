//! Library behind the `comply` binary.

pub mod agree;
pub mod error;
pub mod mock;
pub mod pipeline;
pub mod report;
pub mod run;
pub mod validate;

pub use error::CliError;
pub use pipeline::{CaseOutcome, ContextAugmenter, Method, Pipeline, VerdictLine};
pub use run::{cmd_run, RepeatSummary, RunConfig, RunSummary};
