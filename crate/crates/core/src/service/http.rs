//! The HTTP API over an [`Explorer`].
//!
//! Errors come back as `{"error": kind, "message": text}` with a 4xx/5xx
//! status. An empty selection or trace is an ordinary 200 reply whose
//! `status` field says so.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::explorer::{parse_subject, ColoredTrace, Explorer, SelectRequest, SelectionSummary};
use crate::error::{Error, ErrorKind};
use crate::halo::HaloId;

pub const HSNP_CONTENT_TYPE: &str = "application/octet-stream";

#[derive(Debug)]
pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status_of(kind: ErrorKind) -> StatusCode {
    use ErrorKind::*;
    match kind {
        NoSuchSession | NoSuchDataset | NoSuchHalo | NoSuchCluster => StatusCode::NOT_FOUND,
        NoActiveSelection | Superseded => StatusCode::CONFLICT,
        Io | Format | IncompleteDataset | DuplicateId | BrokenLink | BadLink | FofViolation | Cycle => {
            StatusCode::INTERNAL_SERVER_ERROR
        }
        _ => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let kind = self.0.kind();
        let body = json!({ "error": kind.as_str(), "message": self.0.to_string() });
        (status_of(kind), Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SelectReply {
    Ok(SelectionSummary),
    /// The lasso found no structure.
    Empty { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TraceReply {
    Ok { paths: Vec<ColoredTrace> },
    EmptyTrace { message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(default)]
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdRequest {
    pub rho0: f64,
}

pub fn router(explorer: Arc<Explorer>) -> Router {
    Router::new()
        .route("/datasets", get(list_datasets))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/points", get(points))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/threshold", post(threshold))
        .route("/sessions/{id}/halos", get(halos))
        .route("/sessions/{id}/trace", get(trace))
        .route("/halos/{halo_id}/tree", get(tree))
        .with_state(explorer)
}

pub async fn serve(explorer: Arc<Explorer>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(explorer)).await
}

/// JSON bodies are parsed here rather than by axum's extractor so that bad
/// input gets the same error shape as everything else.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| Error::InvalidParams(format!("request body: {e}")).into())
}

fn flag(q: &HashMap<String, String>, key: &str) -> bool {
    q.get(key).is_some_and(|v| matches!(v.as_str(), "1" | "true" | "yes"))
}

fn query_num<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<T>> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| Error::InvalidParams(format!("bad {key}: {v:?}")).into()))
        .transpose()
}

/// Runs blocking work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> crate::Result<T> + Send + 'static) -> crate::Result<T> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| std::panic::resume_unwind(e.into_panic()))
}

fn select_reply(r: crate::Result<SelectionSummary>) -> ApiResult<Json<SelectReply>> {
    match r {
        Ok(s) => Ok(Json(SelectReply::Ok(s))),
        Err(e @ Error::EmptySelection) => Ok(Json(SelectReply::Empty { message: e.to_string() })),
        Err(e) => Err(e.into()),
    }
}

async fn list_datasets(State(ex): State<Arc<Explorer>>) -> impl IntoResponse {
    Json(ex.datasets())
}

async fn create_session(State(ex): State<Arc<Explorer>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: CreateSession = if body.is_empty() {
        CreateSession { dataset: None }
    } else {
        parse_body(&body)?
    };
    let session_id = ex.create_session(req.dataset.as_deref())?;
    Ok((StatusCode::CREATED, Json(SessionCreated { session_id })))
}

async fn points(
    State(ex): State<Arc<Explorer>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let t = match query_num(&q, "t")? {
        Some(t) => t,
        None => ex.session(&id)?.active_timestep(),
    };
    let bytes = blocking(move || ex.points(&id, t)).await?;
    Ok(([(header::CONTENT_TYPE, HSNP_CONTENT_TYPE)], bytes).into_response())
}

async fn select(
    State(ex): State<Arc<Explorer>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<Json<SelectReply>> {
    let req: SelectRequest = parse_body(&body)?;
    let members = flag(&q, "members");
    select_reply(blocking(move || ex.select(&id, &req, members)).await)
}

async fn threshold(
    State(ex): State<Arc<Explorer>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<Json<SelectReply>> {
    let req: ThresholdRequest = parse_body(&body)?;
    let members = flag(&q, "members");
    select_reply(blocking(move || ex.update_threshold(&id, req.rho0, members)).await)
}

async fn halos(State(ex): State<Arc<Explorer>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || ex.halo_layout(&id)).await?))
}

async fn tree(
    State(ex): State<Arc<Explorer>>,
    Path(halo): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let halo: HaloId = halo
        .parse()
        .map_err(|_| Error::InvalidParams(format!("bad halo id {halo:?}")))?;
    // a session names its dataset; otherwise ?dataset= or the only one open
    let dataset = match q.get("session") {
        Some(s) => Some(ex.session(s)?.dataset.name().to_string()),
        None => q.get("dataset").cloned(),
    };
    let body = blocking(move || Ok(serde_json::to_vec(&*ex.halo_tree(dataset.as_deref(), halo)?)?)).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body))
}

async fn trace(
    State(ex): State<Arc<Explorer>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<TraceReply>> {
    let raw = q
        .get("subject")
        .ok_or_else(|| Error::InvalidParams("missing subject".into()))?;
    let subject = parse_subject(raw)?;
    match blocking(move || ex.trace(&id, &subject)).await {
        Ok(paths) => Ok(Json(TraceReply::Ok { paths })),
        Err(e @ Error::EmptyTrace) => Ok(Json(TraceReply::EmptyTrace { message: e.to_string() })),
        Err(e) => Err(e.into()),
    }
}
