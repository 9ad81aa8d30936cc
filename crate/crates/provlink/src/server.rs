//! HTTP API over an [`Engine`].
//!
//! | route | |
//! |---|---|
//! | `GET /profiles/{id}` | profile document |
//! | `POST /profiles` | store a profile document, re-index and re-link it |
//! | `GET /profiles/{id}/similar` | stored edges of a profile |
//! | `GET /search?q=&k=` | keyword search |
//! | `POST /search/structured` | nested query |
//! | `GET /matches/pending?min_score=&limit=` | unconfirmed edges |
//! | `POST /matches/{id1}/{id2}/confirm` | `{"verdict":"match"\|"nonmatch"}` |
//! | `POST /link/run`, `GET /link/status` | background link run |
//!
//! Errors are `{"status":..,"code":..,"message":..}`.

use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use provlink_core::{LinkRun, LinkRunStats, ProfileId, Verdict};

use crate::engine::Engine;
use crate::error::Error;
use crate::jsonl::{EdgeDoc, NestedQueryDoc, ProfileDoc};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub status: u16,
    pub code: String,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status: status.as_u16(), code: code.into(), message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        use provlink_core::Error as E;
        let message = e.to_string();
        match e {
            Error::Core(E::NotFound(_)) => ApiError::new(StatusCode::NOT_FOUND, "not_found", message),
            Error::Core(E::EdgeNotFound(..)) => ApiError::new(StatusCode::NOT_FOUND, "edge_not_found", message),
            Error::Core(E::MalformedQuery(_)) => ApiError::new(StatusCode::BAD_REQUEST, "malformed_query", message),
            Error::Core(_) | Error::Schema { .. } => ApiError::new(StatusCode::BAD_REQUEST, "schema_error", message),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_failure", message),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "schema_error", r.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn profile_id(raw: &str) -> Result<ProfileId, ApiError> {
    ProfileId::new(raw).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "schema_error", e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Idle,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub profiles_processed: u64,
    pub pairs_scored: u64,
    pub edges_upserted: u64,
    pub edges_pruned: u64,
    pub elapsed_seconds: f64,
}

impl From<LinkRunStats> for StatsDoc {
    fn from(s: LinkRunStats) -> Self {
        Self {
            profiles_processed: s.profiles_processed,
            pairs_scored: s.pairs_scored,
            edges_upserted: s.edges_upserted,
            edges_pruned: s.edges_pruned,
            elapsed_seconds: s.elapsed_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStatus {
    pub state: JobState,
    pub stats: Option<StatsDoc>,
    pub error: Option<String>,
}

/// Shared state of the service.
#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<RwLock<Engine>>,
    job: Arc<Mutex<LinkStatus>>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        Self {
            engine: Arc::new(RwLock::new(engine)),
            job: Arc::new(Mutex::new(LinkStatus { state: JobState::Idle, stats: None, error: None })),
        }
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Engine> {
        self.engine.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Engine> {
        self.engine.write().unwrap_or_else(|p| p.into_inner())
    }

    fn job(&self) -> std::sync::MutexGuard<'_, LinkStatus> {
        self.job.lock().unwrap_or_else(|p| p.into_inner())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/profiles", post(post_profile))
        .route("/profiles/{id}", get(get_profile))
        .route("/profiles/{id}/similar", get(similar))
        .route("/search", get(search))
        .route("/search/structured", post(structured))
        .route("/matches/pending", get(pending))
        .route("/matches/{id1}/{id2}/confirm", post(confirm))
        .route("/link/run", post(link_run))
        .route("/link/status", get(link_status))
        .with_state(state)
}

async fn get_profile(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<ProfileDoc> {
    let id = profile_id(&id)?;
    let p = st.read().profile(&id)?;
    Ok(Json(ProfileDoc::from(&p)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PostProfileResponse {
    pub id: String,
    pub edges: Vec<EdgeDoc>,
}

async fn post_profile(
    State(st): State<AppState>,
    body: Result<Json<ProfileDoc>, JsonRejection>,
) -> Result<(StatusCode, Json<PostProfileResponse>), ApiError> {
    let Json(doc) = body?;
    let p = doc.into_profile().map_err(Error::from)?;
    let mut engine = st.write();
    engine.upsert_profile(&p)?;
    let edges = engine.link_profile(p.id())?;
    let body = PostProfileResponse { id: p.id().to_string(), edges: edges.iter().map(EdgeDoc::from).collect() };
    Ok((StatusCode::CREATED, Json(body)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EdgesResponse {
    pub edges: Vec<EdgeDoc>,
}

async fn similar(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<EdgesResponse> {
    let id = profile_id(&id)?;
    let edges = st.read().similar(&id)?;
    Ok(Json(EdgesResponse { edges: edges.iter().map(EdgeDoc::from).collect() }))
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: String,
    k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Hit {
    pub id: String,
    pub score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    pub results: Vec<Hit>,
}

async fn search(
    State(st): State<AppState>,
    params: Result<Query<SearchParams>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<SearchResponse> {
    let Query(params) = params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed_query", e.body_text()))?;
    let k = params.k.unwrap_or(10);
    if k == 0 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "malformed_query", "k must be at least 1"));
    }
    let hits = st.read().search(&params.q, k);
    Ok(Json(SearchResponse { results: hits.into_iter().map(|(id, score)| Hit { id: id.to_string(), score }).collect() }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IdsResponse {
    pub ids: Vec<String>,
}

async fn structured(
    State(st): State<AppState>,
    body: Result<Json<NestedQueryDoc>, JsonRejection>,
) -> ApiResult<IdsResponse> {
    let Json(doc) = body?;
    let ids = st.read().structured_search(&doc.into())?;
    Ok(Json(IdsResponse { ids: ids.iter().map(ToString::to_string).collect() }))
}

#[derive(Debug, Deserialize)]
struct PendingParams {
    min_score: Option<f64>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PendingResponse {
    pub matches: Vec<EdgeDoc>,
}

async fn pending(
    State(st): State<AppState>,
    params: Result<Query<PendingParams>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<PendingResponse> {
    let Query(params) = params.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed_query", e.body_text()))?;
    let edges = st.read().pending(params.min_score.unwrap_or(0.0), params.limit.unwrap_or(100));
    Ok(Json(PendingResponse { matches: edges.iter().map(EdgeDoc::from).collect() }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfirmBody {
    pub verdict: String,
}

async fn confirm(
    State(st): State<AppState>,
    Path((a, b)): Path<(String, String)>,
    body: Result<Json<ConfirmBody>, JsonRejection>,
) -> ApiResult<EdgeDoc> {
    let Json(body) = body?;
    let (a, b) = (profile_id(&a)?, profile_id(&b)?);
    if a == b {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "same_id", "a profile cannot be paired with itself"));
    }
    let verdict: Verdict = body
        .verdict
        .parse()
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "schema_error", "verdict must be match or nonmatch"))?;
    match st.write().confirm(&a, &b, verdict) {
        Ok(edge) => Ok(Json(EdgeDoc::from(&edge))),
        Err(Error::Core(provlink_core::Error::EdgeNotFound(x, y))) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "edge_not_found",
            format!("no similarity edge between {x} and {y}"),
        )),
        Err(e) => Err(e.into()),
    }
}

async fn link_run(State(st): State<AppState>) -> Result<(StatusCode, Json<LinkStatus>), ApiError> {
    {
        let mut job = st.job();
        if job.state == JobState::Running {
            return Err(ApiError::new(StatusCode::CONFLICT, "link_running", "a link run is already in progress"));
        }
        *job = LinkStatus { state: JobState::Running, stats: None, error: None };
    }
    let worker = st.clone();
    tokio::task::spawn_blocking(move || {
        let started = std::time::Instant::now();
        let ids: Vec<ProfileId> = worker.read().index().ids().cloned().collect();
        let mut run = LinkRun::new();
        let mut failure = None;
        for id in &ids {
            // The lock is released between profiles so reads and
            // confirmations are served during the run.
            if let Err(e) = worker.write().link_step(&mut run, id) {
                failure = Some(e.to_string());
                break;
            }
        }
        let mut stats = run.stats();
        stats.elapsed_seconds = started.elapsed().as_secs_f64();
        *worker.job() = LinkStatus {
            state: if failure.is_some() { JobState::Failed } else { JobState::Done },
            stats: Some(stats.into()),
            error: failure,
        };
    });
    let status = st.job().clone();
    Ok((StatusCode::ACCEPTED, Json(status)))
}

async fn link_status(State(st): State<AppState>) -> Json<LinkStatus> {
    Json(st.job().clone())
}

/// Serves until ctrl-c, then checkpoints the engine.
pub async fn serve(state: AppState, port: u16) -> crate::error::Result<()> {
    let addr = std::net::SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(format!("0.0.0.0:{port}"), e))?;
    eprintln!("listening on {addr}");
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(format!("0.0.0.0:{port}"), e))?;
    state.write().checkpoint()
}
