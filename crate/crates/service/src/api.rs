//! HTTP routes. Every endpoint is read-only; bodies are JSON.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use emotion_coherence::CorpusStore;

use crate::bodies;
use crate::error::ApiError;
use crate::query::{list_videos, resolve_selection, ProjectionQuery, SelectionQuery, SortKey};

pub type SharedStore = Arc<CorpusStore>;

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/videos", get(list))
        .route("/videos/{id}", get(video))
        .route("/videos/{id}/sankey", get(sankey))
        .route("/videos/{id}/projection", get(projection))
        .route("/videos/{id}/sentences/{sid}", get(sentence))
        .route("/videos/{id}/words", get(words))
        .route("/videos/{id}/selection", post(selection))
        .route("/media/{id}", get(media))
        .fallback(not_found)
        .with_state(store)
}

/// Runs a store computation off the async executor and tags errors with the request path.
async fn blocking<T, F>(store: &SharedStore, uri: &Uri, f: F) -> Result<Json<T>, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&CorpusStore) -> Result<T, ApiError> + Send + 'static,
{
    let store = Arc::clone(store);
    let result = tokio::task::spawn_blocking(move || f(&store))
        .await
        .unwrap_or_else(|e| Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())));
    result.map(Json).map_err(|e| e.at(uri.path()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>, uri: &Uri) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request(e.body_text()).at(uri.path()))
}

#[derive(Debug, Default, Deserialize)]
struct ListParams {
    sort: Option<String>,
    order: Option<String>,
    q: Option<String>,
}

async fn list(State(store): State<SharedStore>, uri: Uri, q: Result<Query<ListParams>, QueryRejection>) -> Response {
    let params = match query(q, &uri) {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    blocking(&store, &uri, move |store| {
        let key: SortKey = params.sort.as_deref().unwrap_or("coherence").parse()?;
        let order = match params.order.as_deref() {
            Some(o) => o.parse()?,
            None => key.default_order(),
        };
        let keyword = params.q.as_deref().filter(|k| !k.is_empty());
        Ok(list_videos(store, key, order, keyword)?)
    })
    .await
    .into_response()
}

async fn video(State(store): State<SharedStore>, uri: Uri, Path(id): Path<String>) -> Response {
    blocking(&store, &uri, move |store| bodies::video_detail(store, &id)).await.into_response()
}

async fn sankey(State(store): State<SharedStore>, uri: Uri, Path(id): Path<String>) -> Response {
    blocking(&store, &uri, move |store| bodies::sankey(store, &id)).await.into_response()
}

async fn projection(
    State(store): State<SharedStore>,
    uri: Uri,
    Path(id): Path<String>,
    q: Result<Query<ProjectionQuery>, QueryRejection>,
) -> Response {
    let params = match query(q, &uri) {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    blocking(&store, &uri, move |store| bodies::projection(store, &id, &params)).await.into_response()
}

async fn sentence(State(store): State<SharedStore>, uri: Uri, Path((id, sid)): Path<(String, String)>) -> Response {
    let Ok(sid) = sid.parse::<usize>() else {
        return ApiError::bad_request(format!("sentence id `{sid}` is not a non-negative integer")).at(uri.path()).into_response();
    };
    blocking(&store, &uri, move |store| bodies::sentence_detail(store, &id, sid)).await.into_response()
}

#[derive(Debug, Default, Deserialize)]
struct WordParams {
    sort: Option<String>,
    q: Option<String>,
}

async fn words(
    State(store): State<SharedStore>,
    uri: Uri,
    Path(id): Path<String>,
    q: Result<Query<WordParams>, QueryRejection>,
) -> Response {
    let params = match query(q, &uri) {
        Ok(p) => p,
        Err(e) => return e.into_response(),
    };
    blocking(&store, &uri, move |store| {
        let filter = params.q.as_deref().filter(|k| !k.is_empty());
        bodies::word_table(store, &id, params.sort.as_deref(), filter)
    })
    .await
    .into_response()
}

async fn selection(
    State(store): State<SharedStore>,
    uri: Uri,
    Path(id): Path<String>,
    body: Result<Json<SelectionQuery>, JsonRejection>,
) -> Response {
    let q = match body {
        Ok(Json(q)) => q,
        Err(e) => return ApiError::bad_request(e.body_text()).at(uri.path()).into_response(),
    };
    blocking(&store, &uri, move |store| resolve_selection(store, &id, &q)).await.into_response()
}

async fn media(State(store): State<SharedStore>, uri: Uri, Path(id): Path<String>, headers: HeaderMap) -> Response {
    let path = match store.entry(&id) {
        Ok(entry) => entry.media.clone(),
        Err(e) => return ApiError::from(e).at(uri.path()).into_response(),
    };
    let Some(path) = path else {
        return ApiError::new(StatusCode::NOT_FOUND, "no_media", format!("video `{id}` has no media file"))
            .at(uri.path())
            .into_response();
    };
    match crate::media::serve_file(&path, &headers).await {
        Ok(r) => r,
        Err(e) => e.at(uri.path()).into_response(),
    }
}

async fn not_found(uri: Uri) -> Response {
    ApiError::not_found(format!("no route for {}", uri.path())).at(uri.path()).into_response()
}
