//! JSON-over-HTTP query service.
//!
//! | method | path                | body                                             |
//! |--------|---------------------|--------------------------------------------------|
//! | POST   | `/api/query`        | `{text, mode, k?, answer_length?, target_lang?}` |
//! | GET    | `/api/health`       |                                                  |
//! | POST   | `/api/admin/reload` |                                                  |
//!
//! Requests are answered from an immutable snapshot (model + stores). A
//! reload builds a new snapshot from the checkpoint file and swaps it in
//! atomically; requests already running keep the snapshot they started with.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use arc_swap::ArcSwap;
use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use defembed::{checkpoint, load_embeddings, tokenize, Error, Query, QueryAnswer, QueryEngine, QueryMode};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceConfig {
    pub checkpoint: PathBuf,
    pub target: PathBuf,
    pub bilingual: Vec<PathBuf>,
    pub bind: String,
    pub port: u16,
    pub default_k: usize,
    /// Longest accepted query, in tokens.
    pub max_query_tokens: usize,
}

impl ServiceConfig {
    pub const DEFAULT_BIND: &'static str = "127.0.0.1";
    pub const DEFAULT_PORT: u16 = 8080;
    pub const DEFAULT_K: usize = 10;
    pub const DEFAULT_MAX_QUERY_TOKENS: usize = 64;
}

/// A loaded model and its stores.
pub struct Snapshot {
    pub engine: QueryEngine,
    /// SHA-256 of the checkpoint file.
    pub model_hash: String,
}

/// Loads the checkpoint and every store, checking that dimensions agree.
pub fn load_snapshot(config: &ServiceConfig) -> anyhow::Result<Snapshot> {
    let target = load_embeddings(&config.target)
        .with_context(|| format!("loading target embeddings {}", config.target.display()))?;
    let bilingual = config
        .bilingual
        .iter()
        .map(|p| load_embeddings(p).with_context(|| format!("loading {}", p.display())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let (model, model_hash) = load_checkpoint(&config.checkpoint)?;
    let engine = QueryEngine::new(model, target, bilingual).context("checking model against stores")?;
    Ok(Snapshot { engine, model_hash })
}

fn load_checkpoint(path: &std::path::Path) -> anyhow::Result<(defembed::Encoder<f32>, String)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading checkpoint {}", path.display()))?;
    let model = checkpoint::from_bytes(&bytes)
        .with_context(|| format!("loading checkpoint {}", path.display()))?;
    Ok((model, checkpoint::hash_bytes(&bytes)))
}

pub struct AppState {
    config: ServiceConfig,
    snapshot: ArcSwap<Snapshot>,
    reload: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(config: ServiceConfig, snapshot: Snapshot) -> Arc<Self> {
        Arc::new(AppState {
            config,
            snapshot: ArcSwap::from_pointee(snapshot),
            reload: tokio::sync::Mutex::new(()),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.load_full()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub text: String,
    pub mode: QueryMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_lang: Option<String>,
}

impl QueryRequest {
    pub fn to_query(&self, default_k: usize) -> Query {
        Query {
            text: self.text.clone(),
            mode: self.mode,
            k: self.k.unwrap_or(default_k),
            answer_length: self.answer_length,
            target_language: self.target_lang.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedWord {
    pub rank: usize,
    pub word: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub candidates: Vec<RankedWord>,
    pub skipped_tokens: Vec<String>,
}

impl From<QueryAnswer> for QueryResponse {
    fn from(a: QueryAnswer) -> Self {
        QueryResponse {
            candidates: a
                .candidates
                .candidates
                .into_iter()
                .enumerate()
                .map(|(i, c)| RankedWord {
                    rank: i + 1,
                    word: c.token,
                    score: c.score,
                })
                .collect(),
            skipped_tokens: a.skipped_tokens,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: ErrorBody,
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match e {
            Error::NoKnownTokens => (StatusCode::UNPROCESSABLE_ENTITY, "no_known_tokens"),
            Error::ZeroNorm => (StatusCode::UNPROCESSABLE_ENTITY, "zero_vector"),
            Error::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "invalid_query"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}: {}", self.code, self.message);
        }
        let body = ErrorResponse {
            error: ErrorBody {
                code: self.code.to_owned(),
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub model: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReloadResponse {
    pub status: String,
    pub model: String,
    pub previous: String,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/query", post(query))
        .route("/api/health", get(health))
        .route("/api/admin/reload", post(reload))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<HealthResponse> {
    Json(HealthResponse {
        status: "ok".into(),
        model: state.snapshot().model_hash.clone(),
    })
}

async fn query(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<QueryResponse>, ApiError> {
    let request: QueryRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", format!("malformed request body: {e}")))?;
    let limit = state.config.max_query_tokens;
    let n_tokens = tokenize(&request.text).len();
    if n_tokens > limit {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "query_too_long",
            format!("query has {n_tokens} tokens; the limit is {limit}"),
        ));
    }
    let query = request.to_query(state.config.default_k);
    let snapshot = state.snapshot();
    let answer = tokio::task::spawn_blocking(move || snapshot.engine.run(&query))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(answer.into()))
}

async fn reload(State(state): State<Arc<AppState>>) -> Result<Json<ReloadResponse>, ApiError> {
    let _writer = state.reload.lock().await;
    let path = state.config.checkpoint.clone();
    let loaded = tokio::task::spawn_blocking(move || load_checkpoint(&path))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let fail = |e: anyhow::Error| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "reload_failed", format!("{e:#}"));
    let (model, model_hash) = loaded.map_err(fail)?;
    let previous = state.snapshot();
    let engine = previous
        .engine
        .with_model(model)
        .map_err(|e| fail(anyhow::Error::new(e).context("checking model against stores")))?;
    state.snapshot.store(Arc::new(Snapshot {
        engine,
        model_hash: model_hash.clone(),
    }));
    log::info!("reloaded model {model_hash}");
    Ok(Json(ReloadResponse {
        status: "reloaded".into(),
        model: model_hash,
        previous: previous.model_hash.clone(),
    }))
}

/// Binds the configured address. Port 0 picks a free port.
pub async fn bind(config: &ServiceConfig) -> anyhow::Result<TcpListener> {
    let addr = format!("{}:{}", config.bind, config.port);
    TcpListener::bind(&addr)
        .await
        .with_context(|| format!("binding {addr}"))
}

/// Serves until `shutdown` resolves.
pub async fn run(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    let addr: SocketAddr = listener.local_addr()?;
    log::info!("listening on http://{addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .context("serving")
}
