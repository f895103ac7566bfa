//! Drive the HTTP API in-process: store a scenario, upload a workbook,
//! run, and fetch the report. `workbench serve` exposes the same router.

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use sheet_workbench::policy::Registry;
use sheet_workbench::service::{router, AppState, Workspace, DEFAULT_MAX_UPLOAD};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Vec<u8>) -> serde_json::Value {
    let request = Request::builder().method(method).uri(uri).body(Body::from(body)).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    println!("{method} {uri} -> {status}");
    serde_json::from_slice(&bytes).unwrap_or(serde_json::Value::Null)
}

#[tokio::main]
async fn main() {
    let fixtures = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(Workspace::open(dir.path()).unwrap(), Registry::builtin()), DEFAULT_MAX_UPLOAD);

    let checkers = call(&app, "GET", "/checkers", vec![]).await;
    println!("  {} checkers", checkers.as_array().unwrap().len());
    let scenario = std::fs::read(fixtures.join("scenarios/quarterly.json")).unwrap();
    call(&app, "PUT", "/scenarios/quarterly", scenario).await;
    let upload = call(&app, "POST", "/workbooks?filename=quarterly.json", std::fs::read(fixtures.join("quarterly.json")).unwrap()).await;
    let id = upload["workbook_id"].as_str().unwrap().to_string();
    let body = serde_json::json!({ "scenario_id": "quarterly", "workbook_ids": [id] });
    let run = call(&app, "POST", "/runs", serde_json::to_vec(&body).unwrap()).await;
    let run_id = run["run_id"].as_str().unwrap();
    let report = call(&app, "GET", &format!("/runs/{run_id}?group=by_cell"), vec![]).await;
    for f in report["findings"].as_array().unwrap() {
        println!("  [{}] {}", f["severity"].as_str().unwrap(), f["message"].as_str().unwrap());
    }
    println!("workspace files live under {}", dir.path().display());
}
