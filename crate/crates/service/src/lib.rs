//! HTTP service for interactive searches.
//!
//! Endpoints (all JSON, errors are `{code, message}`):
//!
//! | method | path                    | body                                   |
//! |--------|-------------------------|----------------------------------------|
//! | POST   | `/sessions`             | [`CreateSession`]                      |
//! | GET    | `/sessions/{id}`        |                                        |
//! | POST   | `/sessions/{id}/choice` | [`Choice`]                             |
//! | POST   | `/sessions/{id}/finish` | [`Finish`]                             |
//! | GET    | `/assets/{item_id}`     | serves the item's file from the assets directory |

mod error;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use relfeed_core::engine::EngineParams;
use relfeed_core::session::DEFAULT_MAX_ROUNDS;
use relfeed_core::{Algorithm, Dataset, Session, SessionConfig, SessionStatus};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub use error::{ErrorBody, ServiceError};

type ApiResult<T> = Result<T, ServiceError>;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub dataset_id: String,
    pub assets_dir: Option<PathBuf>,
    /// Finished sessions write `<id>.state` and `<id>.transcript` here.
    pub snapshot_dir: Option<PathBuf>,
    pub max_rounds: usize,
    pub params: EngineParams<f64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            dataset_id: "default".into(),
            assets_dir: None,
            snapshot_dir: None,
            max_rounds: DEFAULT_MAX_ROUNDS,
            params: EngineParams::default(),
        }
    }
}

struct Entry {
    session: Session<f64>,
    created_at: u64,
    updated_at: u64,
}

pub struct AppState {
    dataset: Arc<Dataset<f64>>,
    config: ServiceConfig,
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<Entry>>>>,
}

impl AppState {
    pub fn new(dataset: Dataset<f64>, config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState {
            dataset: Arc::new(dataset),
            config,
            sessions: RwLock::new(HashMap::new()),
        })
    }

    fn entry(&self, id: &str) -> ApiResult<Arc<Mutex<Entry>>> {
        let unknown = || ServiceError::UnknownSession(id.to_string());
        let uuid = Uuid::parse_str(id).map_err(|_| unknown())?;
        let sessions = self.sessions.read().expect("session table poisoned");
        sessions.get(&uuid).cloned().ok_or_else(unknown)
    }

    fn item_index(&self, item_id: &str) -> ApiResult<usize> {
        self.dataset
            .index_of(item_id)
            .ok_or_else(|| ServiceError::UnknownItem(item_id.to_string()))
    }

    fn item(&self, index: usize) -> DisplayItem {
        let item_id = self.dataset.id(index).to_string();
        DisplayItem {
            asset_url: format!("/assets/{item_id}"),
            item_id,
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub algorithm: String,
    pub k: usize,
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub target_preview: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct Choice {
    pub item_id: String,
}

/// Either `found_item_id` or `abandon: true`.
#[derive(Debug, Deserialize)]
pub struct Finish {
    #[serde(default)]
    pub found_item_id: Option<String>,
    #[serde(default)]
    pub abandon: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DisplayItem {
    pub item_id: String,
    pub asset_url: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub algorithm: String,
    pub dataset: String,
    pub k: usize,
    pub round: usize,
    pub max_rounds: usize,
    pub rounds_remaining: usize,
    pub status: String,
    pub found_item_id: Option<String>,
    pub display: Vec<DisplayItem>,
    pub target_preview: Option<DisplayItem>,
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FinishSummary {
    pub session_id: String,
    pub status: String,
    pub found_item_id: Option<String>,
    pub rounds: usize,
    pub distances: Option<Vec<f64>>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn status_name(status: SessionStatus) -> &'static str {
    match status {
        SessionStatus::Active => "active",
        SessionStatus::Found(_) => "found",
        SessionStatus::Abandoned => "abandoned",
    }
}

fn found_id(state: &AppState, status: SessionStatus) -> Option<String> {
    match status {
        SessionStatus::Found(i) => Some(state.dataset.id(i).to_string()),
        _ => None,
    }
}

fn view(state: &AppState, id: Uuid, entry: &Entry) -> SessionView {
    let s = &entry.session;
    let cfg = s.config();
    SessionView {
        session_id: id.to_string(),
        algorithm: cfg.algorithm.to_string(),
        dataset: state.config.dataset_id.clone(),
        k: cfg.k,
        round: s.round(),
        max_rounds: cfg.max_rounds,
        rounds_remaining: s.rounds_remaining(),
        status: status_name(s.status()).into(),
        found_item_id: found_id(state, s.status()),
        display: s.display().indices().iter().map(|&i| state.item(i)).collect(),
        target_preview: cfg.target_preview.map(|i| state.item(i)),
        created_at: entry.created_at,
        updated_at: entry.updated_at,
    }
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    body.map(|Json(b)| b)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req = json_body(body)?;
    if let Some(ds) = &req.dataset {
        if ds != &state.config.dataset_id {
            return Err(ServiceError::UnknownDataset(ds.clone()));
        }
    }
    let algorithm: Algorithm = req.algorithm.parse()?;
    let target_preview = req
        .target_preview
        .as_deref()
        .map(|t| state.item_index(t))
        .transpose()?;
    let id = Uuid::new_v4();
    let seed = req.seed.unwrap_or_else(|| id.as_u64_pair().0);
    let config = SessionConfig {
        algorithm,
        k: req.k,
        seed,
        max_rounds: state.config.max_rounds,
        params: state.config.params,
        target_preview,
    };
    let session = Session::create(&state.dataset, config)?;
    let t = now();
    let entry = Entry {
        session,
        created_at: t,
        updated_at: t,
    };
    let out = view(&state, id, &entry);
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(id, Arc::new(Mutex::new(entry)));
    Ok((StatusCode::CREATED, Json(out)))
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<SessionView>> {
    let entry = state.entry(&id)?;
    let entry = entry.lock().expect("session poisoned");
    Ok(Json(view(&state, Uuid::parse_str(&id).unwrap(), &entry)))
}

async fn submit_choice(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Choice>, JsonRejection>,
) -> ApiResult<Json<SessionView>> {
    let entry = state.entry(&id)?;
    let req = json_body(body)?;
    let item = state.item_index(&req.item_id)?;
    let mut entry = entry.lock().expect("session poisoned");
    entry.session.choose(&state.dataset, item)?;
    entry.updated_at = now();
    Ok(Json(view(&state, Uuid::parse_str(&id).unwrap(), &entry)))
}

async fn finish_session(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<Finish>, JsonRejection>,
) -> ApiResult<Json<FinishSummary>> {
    let entry = state.entry(&id)?;
    let req = json_body(body)?;
    let found = match (&req.found_item_id, req.abandon) {
        (Some(item), false) => Some(state.item_index(item)?),
        (None, true) => None,
        _ => {
            return Err(ServiceError::BadRequest(
                "give exactly one of found_item_id or abandon".into(),
            ))
        }
    };
    let mut entry = entry.lock().expect("session poisoned");
    let summary = entry.session.finish(found)?;
    entry.updated_at = now();
    if let Some(dir) = &state.config.snapshot_dir {
        write_snapshot(dir, &id, &entry.session, &state.dataset)?;
    }
    Ok(Json(FinishSummary {
        session_id: id,
        status: status_name(summary.status).into(),
        found_item_id: found_id(&state, summary.status),
        rounds: summary.rounds,
        distances: summary.distances,
    }))
}

fn write_snapshot(dir: &Path, id: &str, session: &Session<f64>, dataset: &Dataset<f64>) -> ApiResult<()> {
    let io = |path: PathBuf| move |e: std::io::Error| ServiceError::Internal(format!("{}: {e}", path.display()));
    std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
    let state_path = dir.join(format!("{id}.state"));
    std::fs::write(&state_path, session.engine().snapshot(dataset.ids())).map_err(io(state_path.clone()))?;
    let mut transcript = format!("algorithm\t{}\n", session.config().algorithm);
    for entry in session.transcript() {
        let shown: Vec<&str> = entry.display.iter().map(|&i| dataset.id(i)).collect();
        transcript.push_str(&format!("{}\t{}\n", shown.join(","), dataset.id(entry.chosen)));
    }
    let transcript_path = dir.join(format!("{id}.transcript"));
    std::fs::write(&transcript_path, transcript).map_err(io(transcript_path.clone()))
}

fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("svg") => "image/svg+xml",
        Some("bmp") => "image/bmp",
        _ => "application/octet-stream",
    }
}

/// The dataset's asset path for the item if it has one, else the first file
/// in the assets directory named `<item_id>` or `<item_id>.<ext>`.
fn find_asset(dir: &Path, dataset: &Dataset<f64>, index: usize) -> Option<PathBuf> {
    if let Some(rel) = dataset.asset_path(index) {
        let p = dir.join(rel);
        return p.is_file().then_some(p);
    }
    let id = dataset.id(index);
    let exact = dir.join(id);
    if exact.is_file() {
        return Some(exact);
    }
    let mut candidates: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_stem().and_then(|s| s.to_str()) == Some(id))
        .collect();
    candidates.sort();
    candidates.into_iter().next()
}

async fn get_asset(
    State(state): State<Arc<AppState>>,
    UrlPath(item_id): UrlPath<String>,
) -> ApiResult<Response> {
    let index = state.item_index(&item_id)?;
    let dir = state
        .config
        .assets_dir
        .as_deref()
        .ok_or_else(|| ServiceError::UnknownItem(format!("{item_id} (no assets directory)")))?;
    let path = find_asset(dir, &state.dataset, index)
        .ok_or_else(|| ServiceError::UnknownItem(format!("{item_id} (no asset file)")))?;
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ServiceError::Internal(format!("{}: {e}", path.display())))?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/choice", post(submit_choice))
        .route("/sessions/{id}/finish", post(finish_session))
        .route("/assets/{item_id}", get(get_asset))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
