//! HTTP+JSON API over a [`Workspace`].
//!
//! | method | path | purpose |
//! |---|---|---|
//! | GET | `/checkers` | checker descriptors with parameter schemas |
//! | GET | `/scenarios` | stored scenarios |
//! | GET/PUT/DELETE | `/scenarios/{id}` | one scenario; PUT validates, honours `If-Match` |
//! | GET/POST | `/workbooks?filename=` | list, or upload raw workbook bytes |
//! | GET/POST | `/runs` | list, or run `{scenario_id, workbook_ids}` |
//! | GET | `/runs/{id}?group=&checker=&workbook=&severity=&sheet=&range=` | report JSON |
//! | GET/PUT | `/ratings/{workbook_id}` | expert ratings of one workbook |
//! | GET | `/evaluation?run_ids=a,b` | rule evaluation over stored runs |
//!
//! Errors are JSON: 400 `{"error":"validation","issues":[..]}` or
//! `{"error":"bad_request","message":..}`, 404 `{"error":"not_found"}`,
//! 409 `{"error":"conflict"}`, 500 `{"error":"internal","incident_id":..}`.

mod workspace;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Semaphore;

use crate::cli::parse_filters;
use crate::evaluation::{evaluate_rules, parse_error_cell, ExpertRating};
use crate::policy::{Registry, RunError, Scenario};
use crate::report::{GroupKey, Report};

pub use workspace::{etag, is_valid_id, slugify, write_atomic, Workspace, WorkspaceError};

/// 20 MB.
pub const DEFAULT_MAX_UPLOAD: usize = 20 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub workspace: PathBuf,
    pub host: String,
    pub port: u16,
    pub max_upload: usize,
}

/// Shared state of all handlers.
#[derive(Clone)]
pub struct AppState {
    workspace: Arc<Workspace>,
    registry: Registry,
    workers: Arc<Semaphore>,
    scenario_locks: Arc<Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>>,
}

impl AppState {
    pub fn new(workspace: Workspace, registry: Registry) -> Self {
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(2);
        Self {
            workspace: Arc::new(workspace),
            registry,
            workers: Arc::new(Semaphore::new(workers)),
            scenario_locks: Arc::default(),
        }
    }

    fn scenario_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.scenario_locks.lock().expect("lock table poisoned");
        Arc::clone(locks.entry(id.to_string()).or_default())
    }
}

/// An error response.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: json!({"error": "bad_request", "message": message.into()}),
        }
    }

    fn validation(issues: impl Serialize) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            body: json!({"error": "validation", "issues": issues}),
        }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            body: json!({"error": "not_found", "message": format!("{what} {id:?} does not exist")}),
        }
    }

    fn conflict(message: &str) -> Self {
        Self {
            status: StatusCode::CONFLICT,
            body: json!({"error": "conflict", "message": message}),
        }
    }

    fn internal(detail: impl std::fmt::Display) -> Self {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_nanos());
        let incident = format!("{:x}-{:x}", nanos, COUNTER.fetch_add(1, Ordering::Relaxed));
        tracing::error!(incident_id = %incident, "{detail}");
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: json!({"error": "internal", "incident_id": incident}),
        }
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        match e {
            WorkspaceError::InvalidId(id) => ApiError::bad_request(format!("invalid id {id:?}")),
            WorkspaceError::Workbook(e) => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed JSON body: {e}")))
}

fn json_bytes(status: StatusCode, text: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

/// Routes of the API, without transport.
pub fn router(state: AppState, max_upload: usize) -> Router {
    Router::new()
        .route("/checkers", get(list_checkers))
        .route("/scenarios", get(list_scenarios))
        .route("/scenarios/{id}", get(get_scenario).put(put_scenario).delete(delete_scenario))
        .route("/workbooks", get(list_workbooks).post(upload_workbook))
        .route("/runs", get(list_runs).post(create_run))
        .route("/runs/{id}", get(get_run))
        .route("/ratings/{workbook_id}", get(get_ratings).put(put_ratings))
        .route("/evaluation", get(get_evaluation))
        .layer(DefaultBodyLimit::max(max_upload))
        .with_state(state)
}

/// Serves the API until interrupted.
pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let workspace = Workspace::open(&config.workspace)?;
    let app = router(AppState::new(workspace, Registry::builtin()), config.max_upload);
    let listener = tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await?;
    tracing::info!(address = %listener.local_addr()?, workspace = %config.workspace.display(), "serving");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn list_checkers(State(state): State<AppState>) -> impl IntoResponse {
    Json(state.registry.list_checkers())
}

async fn list_scenarios(State(state): State<AppState>) -> ApiResult<impl IntoResponse> {
    let list: Vec<Value> = state
        .workspace
        .list_scenarios()?
        .into_iter()
        .map(|(id, s)| json!({"id": id, "name": s.name, "description": s.description}))
        .collect();
    Ok(Json(list))
}

async fn get_scenario(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let (scenario, tag) = state
        .workspace
        .read_scenario(&id)?
        .ok_or_else(|| ApiError::not_found("scenario", &id))?;
    let mut response = Json(scenario).into_response();
    response
        .headers_mut()
        .insert(header::ETAG, HeaderValue::from_str(&tag).expect("etag is ASCII"));
    Ok(response)
}

async fn put_scenario(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    if !is_valid_id(&id) {
        return Err(ApiError::bad_request(format!("invalid scenario id {id:?}")));
    }
    let scenario: Scenario = parse_body(&body)?;
    let issues = state.registry.validate_scenario(&scenario);
    if !issues.is_empty() {
        return Err(ApiError::validation(issues));
    }
    let lock = state.scenario_lock(&id);
    let Ok(_guard) = lock.try_lock() else {
        return Err(ApiError::conflict("another write to this scenario is in progress"));
    };
    if let Some(expected) = headers.get(header::IF_MATCH).and_then(|v| v.to_str().ok()) {
        let current = state.workspace.read_scenario(&id)?.map(|(_, tag)| tag);
        if current.as_deref() != Some(expected) && expected != "*" {
            return Err(ApiError::conflict("scenario was changed since it was read"));
        }
    }
    let existed = state.workspace.read_scenario(&id)?.is_some();
    let tag = state.workspace.write_scenario(&id, &scenario)?;
    let status = if existed { StatusCode::OK } else { StatusCode::CREATED };
    let mut response = (status, Json(json!({"id": id, "etag": tag}))).into_response();
    response
        .headers_mut()
        .insert(header::ETAG, HeaderValue::from_str(&tag).expect("etag is ASCII"));
    Ok(response)
}

async fn delete_scenario(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let lock = state.scenario_lock(&id);
    let Ok(_guard) = lock.try_lock() else {
        return Err(ApiError::conflict("another write to this scenario is in progress"));
    };
    if state.workspace.delete_scenario(&id)? {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found("scenario", &id))
    }
}

#[derive(Deserialize)]
struct UploadQuery {
    filename: Option<String>,
}

async fn list_workbooks(State(state): State<AppState>) -> ApiResult<impl IntoResponse> {
    Ok(Json(state.workspace.list_workbooks()?))
}

async fn upload_workbook(
    State(state): State<AppState>,
    Query(query): Query<UploadQuery>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    let filename = query
        .filename
        .ok_or_else(|| ApiError::bad_request("query parameter 'filename' is required"))?;
    let workspace = Arc::clone(&state.workspace);
    let book = tokio::task::spawn_blocking(move || workspace.store_workbook(&filename, &body))
        .await
        .map_err(ApiError::internal)??;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "workbook_id": book.id,
            "sheets": book.sheets().iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
            "cell_count": book.cell_count(),
            "formula_count": book.formula_count(),
        })),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunRequest {
    scenario_id: String,
    workbook_ids: Vec<String>,
}

async fn list_runs(State(state): State<AppState>) -> ApiResult<impl IntoResponse> {
    Ok(Json(state.workspace.list_runs()?))
}

async fn create_run(State(state): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let request: RunRequest = parse_body(&body)?;
    if request.workbook_ids.is_empty() {
        return Err(ApiError::bad_request("workbook_ids must not be empty"));
    }
    let (scenario, _) = state
        .workspace
        .read_scenario(&request.scenario_id)?
        .ok_or_else(|| ApiError::not_found("scenario", &request.scenario_id))?;
    let mut books = Vec::with_capacity(request.workbook_ids.len());
    for id in &request.workbook_ids {
        books.push(
            state
                .workspace
                .load_workbook(id)?
                .ok_or_else(|| ApiError::not_found("workbook", id))?,
        );
    }
    let _permit = state.workers.acquire().await.map_err(ApiError::internal)?;
    let registry = state.registry.clone();
    let run = tokio::task::spawn_blocking(move || registry.run_scenario(&scenario, &books))
        .await
        .map_err(ApiError::internal)?
        .map_err(|e| match e {
            RunError::InvalidScenario(issues) => ApiError::validation(issues),
            other => ApiError::bad_request(other.to_string()),
        })?;
    state.workspace.write_run(&run)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({
            "run_id": run.run_id,
            "findings": run.findings.len(),
            "skipped_formulas": run.skipped_formulas.len(),
            "checker_failures": run.checker_failures.len(),
        })),
    ))
}

#[derive(Deserialize, Default)]
struct ReportQuery {
    group: Option<String>,
    checker: Option<String>,
    workbook: Option<String>,
    severity: Option<String>,
    sheet: Option<String>,
    range: Option<String>,
}

async fn get_run(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<ReportQuery>,
) -> ApiResult<Response> {
    let run = state.workspace.read_run(&id)?.ok_or_else(|| ApiError::not_found("run", &id))?;
    let grouping = match &query.group {
        Some(g) => g.parse::<GroupKey>().map_err(ApiError::bad_request)?,
        None => GroupKey::default(),
    };
    let filters: Vec<String> = [
        ("checker", &query.checker),
        ("workbook", &query.workbook),
        ("severity", &query.severity),
        ("sheet", &query.sheet),
        ("range", &query.range),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}")))
    .collect();
    let filter = parse_filters(&filters).map_err(ApiError::bad_request)?;
    let report = Report::build(&run, &filter, grouping);
    Ok(json_bytes(StatusCode::OK, report.to_json_pretty()))
}

async fn get_ratings(State(state): State<AppState>, Path(workbook_id): Path<String>) -> ApiResult<impl IntoResponse> {
    let ratings = state
        .workspace
        .read_ratings(&workbook_id)?
        .ok_or_else(|| ApiError::not_found("ratings for workbook", &workbook_id))?;
    Ok(Json(ratings))
}

async fn put_ratings(
    State(state): State<AppState>,
    Path(workbook_id): Path<String>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    if !is_valid_id(&workbook_id) {
        return Err(ApiError::bad_request(format!("invalid workbook id {workbook_id:?}")));
    }
    let ratings: Vec<ExpertRating> = parse_body(&body)?;
    let sheets: Option<Vec<String>> = state
        .workspace
        .load_workbook(&workbook_id)?
        .map(|b| b.sheets().iter().map(|s| s.name.clone()).collect());
    let mut issues = Vec::new();
    for (i, r) in ratings.iter().enumerate() {
        if r.workbook_id != workbook_id {
            issues.push(json!({
                "field": format!("[{i}].workbook_id"),
                "message": format!("rating is for {:?}, not {workbook_id:?}", r.workbook_id),
            }));
        }
        if r.expert_id.trim().is_empty() {
            issues.push(json!({"field": format!("[{i}].expert_id"), "message": "expert_id must not be empty"}));
        }
        if let (Some(cells), Some(sheets)) = (&r.error_cells, &sheets) {
            for cell in cells {
                if let Err(reason) = parse_error_cell(cell, sheets) {
                    issues.push(json!({
                        "field": format!("[{i}].error_cells"),
                        "message": format!("{cell:?}: {reason}"),
                    }));
                }
            }
        }
    }
    if !issues.is_empty() {
        return Err(ApiError::validation(issues));
    }
    state.workspace.write_ratings(&workbook_id, &ratings)?;
    Ok(Json(json!({"workbook_id": workbook_id, "ratings": ratings.len()})))
}

#[derive(Deserialize)]
struct EvaluationQuery {
    run_ids: String,
}

async fn get_evaluation(State(state): State<AppState>, Query(query): Query<EvaluationQuery>) -> ApiResult<impl IntoResponse> {
    let mut runs = Vec::new();
    for id in query.run_ids.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        runs.push(state.workspace.read_run(id)?.ok_or_else(|| ApiError::not_found("run", id))?);
    }
    if runs.is_empty() {
        return Err(ApiError::bad_request("run_ids must name at least one run"));
    }
    let mut ratings = Vec::new();
    for run in &runs {
        for id in run.workbook_ids() {
            ratings.extend(state.workspace.read_ratings(id)?.unwrap_or_default());
        }
    }
    let result = evaluate_rules(&runs, &ratings).map_err(|e| ApiError {
        status: StatusCode::BAD_REQUEST,
        body: json!({"error": "evaluation", "message": e.to_string()}),
    })?;
    Ok(Json(result))
}
