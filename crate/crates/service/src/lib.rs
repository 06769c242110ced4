//! HTTP service for listening tests and batch MCD evaluation.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/sessions` | `SessionConfig` |
//! | GET | `/sessions/{id}/next` | `?listener=` |
//! | GET | `/audio/{stimulusId}` | |
//! | POST | `/ratings` | `RatingRecord` |
//! | GET | `/results/{id}` | `?trim=` |
//! | GET | `/aggregate` | `?kind=&sessions=a,b` |
//! | POST | `/mcd` | `{refDir, synDir, params?}` |
//!
//! Listener-facing responses never carry the stimulus role or audio path.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use indicvox::eval::{batch_mcd, EvalError, EvalStore, McdParams, McdReport, NextStimulus, RatingRecord, SessionConfig, TestKind};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

#[derive(Clone)]
struct AppState {
    store: Arc<EvalStore>,
    reports: Arc<AtomicU64>,
}

/// Error body: `{"error": "<kind>", "message": "..."}`.
pub struct ApiError(EvalError);

impl From<EvalError> for ApiError {
    fn from(e: EvalError) -> Self {
        ApiError(e)
    }
}

/// Status code and stable error name for each store error.
pub fn error_status(e: &EvalError) -> (StatusCode, &'static str) {
    match e {
        EvalError::UnknownSession(_) => (StatusCode::NOT_FOUND, "UnknownSession"),
        EvalError::UnknownStimulus { .. } => (StatusCode::NOT_FOUND, "UnknownStimulus"),
        EvalError::DuplicateRating { .. } => (StatusCode::CONFLICT, "DuplicateRating"),
        EvalError::OutOfScale(_) => (StatusCode::UNPROCESSABLE_ENTITY, "OutOfScale"),
        EvalError::NotRateable(_) => (StatusCode::UNPROCESSABLE_ENTITY, "NotRateable"),
        EvalError::NoRatings(_) => (StatusCode::UNPROCESSABLE_ENTITY, "NoRatings"),
        EvalError::WrongKind { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "WrongKind"),
        EvalError::NoPairs => (StatusCode::UNPROCESSABLE_ENTITY, "NoPairs"),
        EvalError::InvalidConfig(_) => (StatusCode::BAD_REQUEST, "InvalidConfig"),
        EvalError::MissingStimulus(_) => (StatusCode::BAD_REQUEST, "MissingStimulus"),
        EvalError::InvalidListener => (StatusCode::BAD_REQUEST, "InvalidListener"),
        EvalError::Feature(_) => (StatusCode::BAD_REQUEST, "FeatureError"),
        EvalError::CorruptLog { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "CorruptLog"),
        EvalError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "Io"),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind) = error_status(&self.0);
        (status, Json(serde_json::json!({ "error": kind, "message": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, EvalError> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(EvalError::Io(std::io::Error::other(e.to_string())))),
    }
}

async fn create_session(State(app): State<AppState>, Json(config): Json<SessionConfig>) -> ApiResult<impl IntoResponse> {
    let session = blocking(move || app.store.create_session(&config)).await?;
    Ok((StatusCode::CREATED, Json(session)))
}

#[derive(Deserialize)]
struct ListenerQuery {
    listener: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct NextResponse {
    done: bool,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    stimulus: Option<NextStimulus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    audio_url: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reference_audio_urls: Vec<String>,
}

fn audio_url(stimulus_id: &str) -> String {
    format!("/audio/{stimulus_id}")
}

async fn next_stimulus(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ListenerQuery>,
) -> ApiResult<Json<NextResponse>> {
    let next = app.store.next_stimulus(&id, &q.listener)?;
    Ok(Json(match next {
        Some(n) => NextResponse {
            done: false,
            audio_url: Some(audio_url(&n.stimulus_id)),
            reference_audio_urls: n.reference_stimulus_ids.iter().map(|s| audio_url(s)).collect(),
            stimulus: Some(n),
        },
        None => NextResponse { done: true, stimulus: None, audio_url: None, reference_audio_urls: Vec::new() },
    }))
}

async fn audio(State(app): State<AppState>, Path(stimulus_id): Path<String>) -> ApiResult<Response> {
    let path = app.store.stimulus_audio(&stimulus_id)?;
    let bytes = tokio::fs::read(&path).await.map_err(|e| ApiError(EvalError::Io(e)))?;
    Ok(([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response())
}

async fn submit_rating(State(app): State<AppState>, Json(rating): Json<RatingRecord>) -> ApiResult<impl IntoResponse> {
    let stored = blocking(move || app.store.submit_rating(rating)).await?;
    Ok((StatusCode::CREATED, Json(stored)))
}

#[derive(Deserialize)]
struct TrimQuery {
    trim: Option<f64>,
}

async fn results(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<TrimQuery>) -> ApiResult<Response> {
    Ok(Json(app.store.results(&id, q.trim)?).into_response())
}

#[derive(Deserialize)]
struct AggregateQuery {
    kind: Option<TestKind>,
    sessions: Option<String>,
}

async fn aggregate(State(app): State<AppState>, Query(q): Query<AggregateQuery>) -> ApiResult<Response> {
    let ids: Vec<String> = q
        .sessions
        .as_deref()
        .unwrap_or_default()
        .split(',')
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    let agg = app.store.aggregate(q.kind.unwrap_or(TestKind::Dmos), &ids)?;
    Ok(Json(agg).into_response())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct McdRequest {
    ref_dir: PathBuf,
    syn_dir: PathBuf,
    #[serde(default)]
    params: McdParams,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct McdResponse {
    #[serde(flatten)]
    report: McdReport,
    report_path: PathBuf,
}

async fn mcd(State(app): State<AppState>, Json(req): Json<McdRequest>) -> ApiResult<Json<McdResponse>> {
    let n = app.reports.fetch_add(1, Ordering::Relaxed);
    let dir = app.store.dir().join("reports");
    let response = blocking(move || {
        let report = batch_mcd(&req.ref_dir, &req.syn_dir, &req.params)?;
        std::fs::create_dir_all(&dir)?;
        let stamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_millis());
        let report_path = dir.join(format!("mcd-{stamp}-{n}.tsv"));
        report.save(&report_path)?;
        Ok(McdResponse { report, report_path })
    })
    .await?;
    Ok(Json(response))
}

pub fn router(store: Arc<EvalStore>) -> Router {
    let state = AppState { store, reports: Arc::new(AtomicU64::new(0)) };
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/next", get(next_stimulus))
        .route("/audio/{stimulus_id}", get(audio))
        .route("/ratings", post(submit_rating))
        .route("/results/{id}", get(results))
        .route("/aggregate", get(aggregate))
        .route("/mcd", post(mcd))
        .with_state(state)
}

/// Binds `addr` and serves in a background task. Returns the bound address,
/// useful with port 0.
pub async fn spawn(store: Arc<EvalStore>, addr: SocketAddr) -> std::io::Result<(SocketAddr, JoinHandle<std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let handle = tokio::spawn(async move { axum::serve(listener, router(store)).await });
    Ok((local, handle))
}

/// Serves until the process is stopped.
pub async fn serve(store: Arc<EvalStore>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    axum::serve(listener, router(store)).await
}
