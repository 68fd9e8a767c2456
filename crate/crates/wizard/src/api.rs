use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use compliance_core::graph::DecisionGraph;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

use crate::session::{GraphMeta, HistoryEntry, SessionError, SessionView, WizardSession};

#[derive(Debug, Clone, Default)]
pub struct WizardConfig {
    /// Origin allowed by CORS; any origin when unset.
    pub allowed_origin: Option<String>,
    /// Directory for one JSON snapshot per session.
    pub snapshot_dir: Option<PathBuf>,
}

type SessionMap = HashMap<String, Arc<Mutex<WizardSession>>>;

/// Shared service state: a read-only graph plus the session table.
#[derive(Clone)]
pub struct AppState {
    graph: Arc<DecisionGraph>,
    sessions: Arc<RwLock<SessionMap>>,
    snapshot_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    session_id: String,
    graph_version: String,
    history: Vec<HistoryEntry>,
}

impl AppState {
    /// Fails if the graph does not validate. Snapshots for another graph
    /// version, or whose history no longer replays, are skipped.
    pub fn new(graph: DecisionGraph, snapshot_dir: Option<PathBuf>) -> Result<Self, String> {
        let report = graph.validate();
        if !report.is_clean() {
            return Err(report.to_string());
        }
        let mut sessions = SessionMap::new();
        if let Some(dir) = &snapshot_dir {
            std::fs::create_dir_all(dir).map_err(|e| format!("snapshot dir {}: {e}", dir.display()))?;
            for s in load_snapshots(dir, &graph) {
                sessions.insert(s.session_id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(Self { graph: Arc::new(graph), sessions: Arc::new(RwLock::new(sessions)), snapshot_dir })
    }

    pub fn graph(&self) -> &DecisionGraph {
        &self.graph
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<WizardSession>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "session_not_found", format!("no session {id}")))
    }

    fn snapshot(&self, s: &WizardSession) -> Result<(), ApiError> {
        let Some(dir) = &self.snapshot_dir else { return Ok(()) };
        let snap = Snapshot {
            session_id: s.session_id.clone(),
            graph_version: s.graph_version.clone(),
            history: s.history.clone(),
        };
        let write = || -> std::io::Result<()> {
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            serde_json::to_writer_pretty(&mut tmp, &snap)?;
            tmp.persist(dir.join(format!("{}.json", s.session_id))).map_err(|e| e.error)?;
            Ok(())
        };
        write().map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "snapshot_failed", e.to_string()))
    }
}

fn load_snapshots(dir: &Path, graph: &DecisionGraph) -> Vec<WizardSession> {
    let Ok(entries) = std::fs::read_dir(dir) else { return vec![] };
    entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
        .filter_map(|e| serde_json::from_str::<Snapshot>(&std::fs::read_to_string(e.path()).ok()?).ok())
        .filter(|s| s.graph_version == graph.version)
        .filter_map(|s| WizardSession::restore(s.session_id, graph, s.history).ok())
        .collect()
}

/// JSON error body: `{code, message}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { code: self.code, message: &self.message })).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let (status, code) = match &e {
            SessionError::StaleQuestion { .. } => (StatusCode::CONFLICT, "stale_question"),
            SessionError::Complete => (StatusCode::CONFLICT, "session_complete"),
            SessionError::NothingToUndo => (StatusCode::CONFLICT, "nothing_to_undo"),
            SessionError::InvalidOption { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_option"),
            SessionError::EmptySelection { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "empty_selection"),
            SessionError::Replay(_) => (StatusCode::INTERNAL_SERVER_ERROR, "replay_failed"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    graph_version: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    question_id: String,
    selected: Vec<u32>,
}

type ApiResult = Result<Json<SessionView>, ApiError>;

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    if let Some(v) = req.graph_version.filter(|v| *v != state.graph.version) {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_graph_version",
            format!("graph version {v:?} is not loaded; this service has {:?}", state.graph.version),
        ));
    }
    let session = WizardSession::new(uuid::Uuid::new_v4().to_string(), &state.graph);
    state.snapshot(&session)?;
    let view = session.view(&state.graph)?;
    state.sessions.write().unwrap().insert(session.session_id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

async fn submit_answer(State(state): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult {
    let req: AnswerRequest = parse_body(&body)?;
    if req.question_id.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", "question_id is required"));
    }
    let handle = state.session(&id)?;
    let mut session = handle.lock().unwrap();
    session.answer(&state.graph, &req.question_id, &req.selected)?;
    state.snapshot(&session)?;
    Ok(Json(session.view(&state.graph)?))
}

async fn undo(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let handle = state.session(&id)?;
    let mut session = handle.lock().unwrap();
    session.undo(&state.graph)?;
    state.snapshot(&session)?;
    Ok(Json(session.view(&state.graph)?))
}

async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let handle = state.session(&id)?;
    let session = handle.lock().unwrap();
    Ok(Json(session.view(&state.graph)?))
}

async fn graph_meta(State(state): State<AppState>) -> Json<GraphMeta> {
    Json(GraphMeta::of(&state.graph))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(state: AppState, config: &WizardConfig) -> Router {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match config.allowed_origin.as_deref().and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(origin) => cors.allow_origin(origin),
        None => cors.allow_origin(Any),
    };
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answers", post(submit_answer))
        .route("/sessions/{id}/undo", post(undo))
        .route("/graph/meta", get(graph_meta))
        .fallback(fallback)
        .layer(cors)
        .with_state(state)
}

/// Serves until the process receives Ctrl-C.
pub async fn serve(listener: tokio::net::TcpListener, graph: DecisionGraph, config: WizardConfig) -> std::io::Result<()> {
    let state = AppState::new(graph, config.snapshot_dir.clone())
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    axum::serve(listener, router(state, &config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Blocking entry point for the CLI.
pub fn serve_blocking(addr: SocketAddr, graph: DecisionGraph, config: WizardConfig) -> std::io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("wizard listening on http://{}", listener.local_addr()?);
        serve(listener, graph, config).await
    })
}
