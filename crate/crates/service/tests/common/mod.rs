#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use coherence_service::router;
use emotion_coherence::ingest::{load_bundle_with, BundleManifest, IngestOptions};
use emotion_coherence::store::StoreOptions;
use emotion_coherence::CorpusStore;

pub const FIXTURE_IDS: [&str; 5] = ["cluster-talk", "coherent-talk", "mixed-talk", "single-sentence", "spam-talk"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// In-memory store over the bundled fixtures.
pub fn fixture_store() -> CorpusStore {
    let mut store = CorpusStore::new(StoreOptions::default());
    for id in FIXTURE_IDS {
        let manifest = BundleManifest::from_dir(corpus_dir().join(id)).unwrap();
        store.insert(load_bundle_with(&manifest, &IngestOptions::default()).unwrap()).unwrap();
    }
    store
}

pub fn app() -> Router {
    router(Arc::new(fixture_store()))
}

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>, headers: &[(&str, &str)]) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, headers, body }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    send(app, Method::GET, uri, None, &[]).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> Reply {
    send(app, Method::POST, uri, Some(body), &[]).await
}

/// Compares against `tests/golden/<name>.json`; `UPDATE_GOLDEN=1` rewrites the file.
pub fn check_golden(name: &str, actual: &Value) -> Result<(), String> {
    let path = golden_dir().join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(actual).unwrap() + "\n").unwrap();
        return Ok(());
    }
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e} (run with UPDATE_GOLDEN=1)", path.display()))?;
    let expected: Value = serde_json::from_str(&text).unwrap();
    if &expected == actual {
        Ok(())
    } else {
        Err(format!("{name}: body differs from {}", path.display()))
    }
}

/// Every golden request: `(name, method, uri, body)`.
pub fn golden_requests() -> Vec<(&'static str, Method, &'static str, Option<Value>)> {
    use serde_json::json;
    vec![
        ("list_default", Method::GET, "/videos", None),
        ("list_title_keyword", Method::GET, "/videos?sort=title&q=talk", None),
        ("list_percentage", Method::GET, "/videos?sort=percentage:face:happiness&order=asc", None),
        ("video_mixed", Method::GET, "/videos/mixed-talk", None),
        ("sankey_mixed", Method::GET, "/videos/mixed-talk/sankey", None),
        ("sankey_coherent", Method::GET, "/videos/coherent-talk/sankey", None),
        ("projection_cluster", Method::GET, "/videos/cluster-talk/projection", None),
        ("projection_mixed_literal3", Method::GET, "/videos/mixed-talk/projection?mode=literal3&seed=3", None),
        ("sentence_mixed_1", Method::GET, "/videos/mixed-talk/sentences/1", None),
        ("sentence_spam_2", Method::GET, "/videos/spam-talk/sentences/2", None),
        ("words_coherent_duration", Method::GET, "/videos/coherent-talk/words?sort=duration", None),
        ("words_cluster_filter", Method::GET, "/videos/cluster-talk/words?sort=category-duration:sadness&q=s", None),
        (
            "selection_link",
            Method::POST,
            "/videos/single-sentence/selection",
            Some(json!({"link": {"stage": "face-text", "from": "neutral", "to": "happiness"}})),
        ),
        (
            "selection_node",
            Method::POST,
            "/videos/mixed-talk/selection",
            Some(json!({"node": {"channel": "text", "emotion": "fear"}})),
        ),
        ("error_unknown_video", Method::GET, "/videos/nope/sankey", None),
        ("error_bad_sort", Method::GET, "/videos?sort=loudness", None),
    ]
}
