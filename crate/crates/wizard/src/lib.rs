//! Interactive traversal of the AI Act decision graph over HTTP.
//!
//! A session stores only its answer history. Frontier, status and verdict
//! are recomputed by replaying that history through the graph, so a session
//! can never drift from what batch traversal would produce.

pub mod api;
pub mod session;

pub use api::{router, serve, serve_blocking, ApiError, AppState, WizardConfig};
pub use session::{
    GraphMeta, HistoryEntry, OptionPayload, QuestionPayload, SessionError, SessionStatus, SessionView, WizardSession,
};
