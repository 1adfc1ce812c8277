//! JSON HTTP API.
//!
//! | method | path                      | body / query                     |
//! |--------|---------------------------|----------------------------------|
//! | GET    | `/api/search`             | `q`                              |
//! | GET    | `/api/items`              |                                  |
//! | GET    | `/api/items/{id}`         | local name or full IRI           |
//! | POST   | `/api/items`              | manifest JSON, optional `?seq=`  |
//! | GET    | `/api/explain`            | `uri`, `audience`, `form`        |
//! | GET    | `/api/concepts/{local}`   |                                  |
//! | GET    | `/api/graph`              | `uri`, `depth`                   |
//! | POST   | `/api/query`              | SPARQL-subset text               |
//! | GET    | `/api/stats`              |                                  |
//!
//! Every error is an [`ApiError`] whose `code` comes from [`ErrorCode`].

use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use oak_core::explain::{self, Audience, ExplainError, ExplanationForm, DEFAULT_GRAPH_DEPTH};
use oak_core::kmap::KmapError;
use oak_core::query::{self, evaluate, parse_sparql, QueryError};
use oak_core::rdf::Iri;
use oak_core::vocab::{agricomo, agrikmaps};
use oak_core::wrapper::{parse_manifest, WrapError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::repo::{RepoError, Repository};

/// The closed set of error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    InvalidRequest,
    InvalidManifest,
    InvalidQuery,
    InvalidDepth,
    InvalidItem,
    UnknownEntity,
    UnknownConcept,
    UnknownTransformation,
    UnknownRoute,
    MethodNotAllowed,
    AlreadyExists,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 12] = [
        ErrorCode::InvalidRequest,
        ErrorCode::InvalidManifest,
        ErrorCode::InvalidQuery,
        ErrorCode::InvalidDepth,
        ErrorCode::InvalidItem,
        ErrorCode::UnknownEntity,
        ErrorCode::UnknownConcept,
        ErrorCode::UnknownTransformation,
        ErrorCode::UnknownRoute,
        ErrorCode::MethodNotAllowed,
        ErrorCode::AlreadyExists,
        ErrorCode::Internal,
    ];

    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::InvalidRequest | ErrorCode::InvalidQuery | ErrorCode::InvalidDepth => StatusCode::BAD_REQUEST,
            ErrorCode::InvalidManifest | ErrorCode::InvalidItem | ErrorCode::UnknownTransformation => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ErrorCode::UnknownEntity | ErrorCode::UnknownConcept | ErrorCode::UnknownRoute => StatusCode::NOT_FOUND,
            ErrorCode::MethodNotAllowed => StatusCode::METHOD_NOT_ALLOWED,
            ErrorCode::AlreadyExists => StatusCode::CONFLICT,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::InvalidRequest => "InvalidRequest",
            ErrorCode::InvalidManifest => "InvalidManifest",
            ErrorCode::InvalidQuery => "InvalidQuery",
            ErrorCode::InvalidDepth => "InvalidDepth",
            ErrorCode::InvalidItem => "InvalidItem",
            ErrorCode::UnknownEntity => "UnknownEntity",
            ErrorCode::UnknownConcept => "UnknownConcept",
            ErrorCode::UnknownTransformation => "UnknownTransformation",
            ErrorCode::UnknownRoute => "UnknownRoute",
            ErrorCode::MethodNotAllowed => "MethodNotAllowed",
            ErrorCode::AlreadyExists => "AlreadyExists",
            ErrorCode::Internal => "Internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into(), detail: None }
    }

    fn with(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::new(ErrorCode::InvalidRequest, r.body_text())
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::UnknownConcept(ref name) => {
                ApiError::new(ErrorCode::UnknownConcept, e.to_string()).with(json!({ "name": name }))
            }
            QueryError::Item(k) => k.into(),
            other => ApiError::new(ErrorCode::InvalidQuery, other.to_string()),
        }
    }
}

impl From<KmapError> for ApiError {
    fn from(e: KmapError) -> Self {
        match e {
            KmapError::NotAKnowledgeModel(ref iri) => {
                ApiError::new(ErrorCode::UnknownEntity, e.to_string()).with(json!({ "uri": iri }))
            }
            // stored data is validated on load, so anything else is a defect
            other => ApiError::new(ErrorCode::Internal, other.to_string()),
        }
    }
}

impl From<ExplainError> for ApiError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::UnknownEntity(ref uri) => {
                ApiError::new(ErrorCode::UnknownEntity, e.to_string()).with(json!({ "uri": uri }))
            }
            ExplainError::InvalidDepth => ApiError::new(ErrorCode::InvalidDepth, e.to_string()),
            ExplainError::UnexplainedConcept { .. } => ApiError::new(ErrorCode::UnknownConcept, e.to_string()),
            ExplainError::Item(k) => k.into(),
        }
    }
}

impl From<RepoError> for ApiError {
    fn from(e: RepoError) -> Self {
        match e {
            RepoError::Wrap(WrapError::UnknownConcept(ref name)) => {
                ApiError::new(ErrorCode::UnknownConcept, e.to_string()).with(json!({ "name": name }))
            }
            RepoError::Wrap(WrapError::UnknownTransformation(ref name)) => {
                ApiError::new(ErrorCode::UnknownTransformation, e.to_string()).with(json!({ "name": name }))
            }
            RepoError::Wrap(WrapError::InvalidItem(ref v)) => {
                let violations = serde_json::to_value(v).unwrap_or_default();
                ApiError::new(ErrorCode::InvalidItem, e.to_string()).with(json!({ "violations": violations }))
            }
            RepoError::AlreadyExists(ref iri) => {
                ApiError::new(ErrorCode::AlreadyExists, e.to_string()).with(json!({ "uri": iri }))
            }
            other => ApiError::new(ErrorCode::Internal, other.to_string()),
        }
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = State<Arc<Repository>>;

/// Resolves a full IRI or an `AgriComO:` / `AgriKMaps:` prefixed name.
pub fn resolve_uri(text: &str) -> Result<Iri, ApiError> {
    let text = text.trim();
    let unknown =
        || ApiError::new(ErrorCode::UnknownEntity, format!("unknown entity `{text}`")).with(json!({ "uri": text }));
    if let Some(local) = text.strip_prefix("AgriComO:") {
        return Ok(agricomo::term(local));
    }
    if let Some(local) = text.strip_prefix("AgriKMaps:") {
        return Ok(agrikmaps::term(local));
    }
    Iri::new(text).map_err(|_| unknown())
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    q: Option<String>,
}

async fn search(State(repo): Shared, params: Result<Query<SearchParams>, QueryRejection>) -> ApiResult<Value> {
    let Query(p) = params?;
    let q = p.q.unwrap_or_default();
    let s = repo.snapshot();
    let results = query::search(&s.knowledge, &s.ontology, &q)?;
    Ok(Json(json!({ "query": q, "count": results.len(), "results": results })))
}

async fn list_items(State(repo): Shared) -> ApiResult<Value> {
    let s = repo.snapshot();
    let items =
        s.models().iter().map(|m| query::summarize(&s.knowledge, &s.ontology, m)).collect::<Result<Vec<_>, _>>()?;
    Ok(Json(json!({ "count": items.len(), "items": items })))
}

async fn get_item(State(repo): Shared, Path(id): Path<String>) -> ApiResult<Value> {
    let iri = if id.contains(':') { resolve_uri(&id)? } else { agrikmaps::term(&id) };
    let s = repo.snapshot();
    let summary = query::summarize(&s.knowledge, &s.ontology, &iri)?;
    let turtle = crate::repo::item_document(&s.knowledge, &iri)?;
    Ok(Json(json!({ "item": summary, "turtle": turtle })))
}

#[derive(Debug, Deserialize)]
pub struct IngestParams {
    seq: Option<u32>,
}

async fn post_item(
    State(repo): Shared,
    params: Result<Query<IngestParams>, QueryRejection>,
    body: String,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let Query(p) = params?;
    let manifest = parse_manifest(&body).map_err(|e| {
        ApiError::new(ErrorCode::InvalidManifest, e.to_string()).with(json!({ "path": e.path, "reason": e.reason }))
    })?;
    let seq = p.seq.or_else(|| oak_core::wrapper::manifest_seq(&body));
    let repo2 = repo.clone();
    let done = tokio::task::spawn_blocking(move || repo2.ingest_manifest(&manifest, seq))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))??;
    let s = repo.snapshot();
    let summary = query::summarize(&s.knowledge, &s.ontology, &done.report.item.iri)?;
    let body = json!({
        "item": summary,
        "seq": done.seq,
        "added": done.added,
        "turtle": done.report.turtle,
        "step_log": done.report.step_log,
    });
    Ok((StatusCode::CREATED, Json(body)))
}

#[derive(Debug, Deserialize)]
pub struct ExplainParams {
    uri: Option<String>,
    audience: Option<String>,
    form: Option<String>,
}

fn parse_audience(a: Option<&str>) -> Result<Audience, ApiError> {
    match a {
        None => Ok(Audience::Manager),
        Some(text) => Audience::parse(text).ok_or_else(|| {
            ApiError::new(ErrorCode::InvalidRequest, format!("unknown audience `{text}`"))
                .with(json!({ "allowed": ["manager", "data_scientist", "agronomist"] }))
        }),
    }
}

fn parse_form(f: Option<&str>) -> Result<ExplanationForm, ApiError> {
    match f {
        None => Ok(ExplanationForm::Natural),
        Some(text) => ExplanationForm::parse(text).ok_or_else(|| {
            ApiError::new(ErrorCode::InvalidRequest, format!("unknown form `{text}`"))
                .with(json!({ "allowed": ["formal", "natural", "graphic"] }))
        }),
    }
}

fn required<'a>(v: &'a Option<String>, name: &str) -> Result<&'a str, ApiError> {
    v.as_deref().ok_or_else(|| ApiError::new(ErrorCode::InvalidRequest, format!("missing query parameter `{name}`")))
}

async fn explain(
    State(repo): Shared,
    params: Result<Query<ExplainParams>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(p) = params?;
    let uri = resolve_uri(required(&p.uri, "uri")?)?;
    let audience = parse_audience(p.audience.as_deref())?;
    let form = parse_form(p.form.as_deref())?;
    let s = repo.snapshot();
    let e = explain::explain_entity(&s.knowledge, &s.ontology, &uri, audience, form)?;
    Ok(Json(e).into_response())
}

async fn concept(State(repo): Shared, Path(local): Path<String>) -> Result<Response, ApiError> {
    let s = repo.snapshot();
    let iri = agricomo::term(&local);
    let entry = s.ontology.entry(&iri).ok_or_else(|| {
        ApiError::new(ErrorCode::UnknownEntity, format!("unknown concept `{local}`")).with(json!({ "uri": iri }))
    })?;
    let category = entry.category.map(|c| c.title());
    Ok(Json(json!({ "entry": entry, "category_title": category })).into_response())
}

#[derive(Debug, Deserialize)]
pub struct GraphParams {
    uri: Option<String>,
    depth: Option<u32>,
}

async fn graph(State(repo): Shared, params: Result<Query<GraphParams>, QueryRejection>) -> Result<Response, ApiError> {
    let Query(p) = params?;
    let uri = resolve_uri(required(&p.uri, "uri")?)?;
    let s = repo.snapshot();
    let payload = explain::render_graph(&s.knowledge, &s.ontology, &uri, p.depth.unwrap_or(DEFAULT_GRAPH_DEPTH))?;
    Ok(Json(payload).into_response())
}

/// Accepts raw query text, or a JSON object `{"query": "..."}`.
async fn run_query(State(repo): Shared, body: String) -> ApiResult<Value> {
    let text = match serde_json::from_str::<Value>(&body) {
        Ok(Value::Object(o)) => o.get("query").and_then(Value::as_str).map(str::to_string).unwrap_or_default(),
        _ => body,
    };
    let pattern = parse_sparql(&text).map_err(|e| {
        ApiError::new(ErrorCode::InvalidQuery, e.to_string()).with(json!({ "line": e.line, "column": e.column }))
    })?;
    let s = repo.snapshot();
    let rows = evaluate(&pattern, &s.graph);
    Ok(Json(json!({ "variables": pattern.selected(), "count": rows.len(), "bindings": rows })))
}

async fn stats(State(repo): Shared) -> ApiResult<Value> {
    let s = repo.snapshot();
    let stats = s.ontology.stats();
    Ok(Json(json!({
        "categories": stats.categories,
        "total": stats.total,
        "structural": stats.structural,
        "items": s.models().len(),
    })))
}

async fn unknown_route() -> ApiError {
    ApiError::new(ErrorCode::UnknownRoute, "no such endpoint")
}

pub fn router(repo: Arc<Repository>) -> Router {
    Router::new()
        .route("/api/search", get(search))
        .route("/api/items", get(list_items).post(post_item))
        .route("/api/items/{id}", get(get_item))
        .route("/api/explain", get(explain))
        .route("/api/concepts/{local}", get(concept))
        .route("/api/graph", get(graph))
        .route("/api/query", post(run_query))
        .route("/api/stats", get(stats))
        .fallback(unknown_route)
        .method_not_allowed_fallback(|| async { ApiError::new(ErrorCode::MethodNotAllowed, "method not allowed") })
        .with_state(repo)
}
