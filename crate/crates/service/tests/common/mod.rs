#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use lumiref_core::catalog::Corpus;
use lumiref_core::navigation::{AlbumStore, FixedClock, MemoryAlbumStore, NavConfig};
use lumiref_core::thesaurus::Thesaurus;
use lumiref_service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn clock() -> FixedClock {
    FixedClock(Utc.with_ymd_and_hms(2026, 6, 1, 9, 30, 0).unwrap())
}

/// Seven categories `c0..c6` of six terms `t{c}.{i}` each.
pub fn thesaurus_json() -> String {
    let cats: Vec<Value> = (0..7)
        .map(|c| {
            let terms: Vec<Value> = (0..6)
                .map(|t| json!({"id": format!("t{c}.{t}"), "label": format!("term {c}.{t}")}))
                .collect();
            json!({"id": format!("c{c}"), "label": format!("category {c}"), "terms": terms})
        })
        .collect();
    json!({"version": "test-1", "categories": cats}).to_string()
}

pub fn thesaurus() -> Thesaurus {
    Thesaurus::load(thesaurus_json().as_bytes()).unwrap()
}

pub fn line(id: &str, index: &[(&str, i64)]) -> String {
    let index: Vec<Value> = index
        .iter()
        .map(|(t, w)| json!({"term": t, "weight": w}))
        .collect();
    json!({"id": id, "uri": format!("file:///refs/{id}.jpg"), "index": index}).to_string()
}

/// 40 deterministic images spread over the first six categories, plus a
/// duplicate of img00 and an image whose only term no one else uses.
pub fn corpus_jsonl() -> String {
    let mut lines = Vec::new();
    for i in 0..40usize {
        let terms: Vec<(String, i64)> = (0..4)
            .map(|j| {
                let c = (i + j * 2) % 6;
                let t = (i * 7 + j * 3) % 5;
                (format!("t{c}.{t}"), ((i + j) % 4 + 1) as i64)
            })
            .collect();
        let mut seen = std::collections::BTreeSet::new();
        let index: Vec<(&str, i64)> = terms
            .iter()
            .filter(|(t, _)| seen.insert(t.clone()))
            .map(|(t, w)| (t.as_str(), *w))
            .collect();
        lines.push(line(&format!("img{i:02}"), &index));
    }
    let first = lines[0].replace("img00", "dup00");
    lines.push(first);
    lines.push(line("iso", &[("t6.5", 2)]));
    lines.join("\n") + "\n"
}

pub fn corpus(th: &Thesaurus) -> Corpus {
    Corpus::ingest(corpus_jsonl().as_bytes(), th).unwrap()
}

pub fn state_with(
    corpus: Corpus,
    albums: Arc<dyn AlbumStore>,
    session_dir: Option<PathBuf>,
) -> Arc<AppState> {
    Arc::new(
        AppState::new(
            Arc::new(thesaurus()),
            Arc::new(corpus),
            albums,
            Arc::new(clock()),
            NavConfig::default(),
            session_dir,
        )
        .unwrap(),
    )
}

pub fn app() -> Router {
    let th = thesaurus();
    router(state_with(corpus(&th), Arc::new(MemoryAlbumStore::new()), None))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    raw(app, req.body(body).unwrap()).await
}

pub async fn raw(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

/// Opens a session and returns its id.
pub async fn session(app: &Router, body: Value) -> String {
    let (status, v) = post(app, "/sessions", body).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v["id"].as_str().unwrap().to_owned()
}

pub async fn step(app: &Router, id: &str, t: Value) -> (StatusCode, Value) {
    post(app, &format!("/sessions/{id}/transitions"), t).await
}
