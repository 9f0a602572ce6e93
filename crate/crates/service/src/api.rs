//! HTTP routes. Every error body is an [`ApiError`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use lumiref_core::ids::SessionId;
use lumiref_core::navigation::{
    corpus_graph, Album, NavigationSession, Origin, Outcome, Transition,
};
use lumiref_core::thesaurus::Thesaurus;
use lumiref_core::vsm::{RankedList, Scope};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::search::{search, SearchRequest};
use crate::state::AppState;

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

pub const DEFAULT_PAGE: usize = 50;
pub const MAX_PAGE: usize = 500;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/thesaurus", get(thesaurus))
        .route("/images", get(images))
        .route("/images/{id}", get(image))
        .route("/search", post(search_handler))
        .route("/graph", get(whole_graph))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/transitions", post(transition))
        .route("/sessions/{id}/ranked", get(session_ranked))
        .route("/sessions/{id}/mosaic", get(session_mosaic))
        .route("/sessions/{id}/groups", get(session_groups))
        .route("/sessions/{id}/graph", get(session_graph))
        .route("/albums", get(list_albums).post(create_album))
        .route("/albums/{id}", get(get_album))
        .fallback(|| async { ApiError::new("NotFound", "no such route") })
        .with_state(state)
}

/// Parses a JSON body; an empty body reads as `{}`.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    let raw: &[u8] = if bytes.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        bytes
    };
    serde_json::from_slice(raw).map_err(|e| ApiError::malformed(e.to_string()))
}

fn query<T: DeserializeOwned>(q: Result<Query<T>, axum::extract::rejection::QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::malformed(e.body_text()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub corpus_size: usize,
    pub thesaurus_version: String,
    pub corpus_checksum: String,
}

async fn health(State(st): Shared) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        corpus_size: st.corpus.len(),
        thesaurus_version: st.thesaurus.version().to_owned(),
        corpus_checksum: st.checksum.clone(),
    })
}

async fn thesaurus(State(st): Shared) -> Json<Thesaurus> {
    Json((*st.thesaurus).clone())
}

#[derive(Debug, Deserialize)]
struct Page {
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn images(
    State(st): Shared,
    q: Result<Query<Page>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Value> {
    let page = query(q)?;
    let offset = page.offset.unwrap_or(0);
    let limit = page.limit.unwrap_or(DEFAULT_PAGE).min(MAX_PAGE);
    let items: Vec<_> = st.corpus.records().iter().skip(offset).take(limit).collect();
    Ok(Json(json!({
        "total": st.corpus.len(),
        "offset": offset,
        "limit": limit,
        "items": items,
    })))
}

async fn image(State(st): Shared, Path(id): Path<String>) -> ApiResult<Value> {
    let record = st
        .corpus
        .get(&id)
        .ok_or_else(|| ApiError::new("UnknownImage", format!("unknown image {id}")))?;
    Ok(Json(serde_json::to_value(record).expect("record serializes")))
}

async fn search_handler(State(st): Shared, bytes: Bytes) -> ApiResult<RankedList> {
    let req: SearchRequest = body(&bytes)?;
    let spec = req.spec()?;
    let ranked = search(&st.thesaurus, &st.corpus, &req.restriction, req.idf, &spec, req.limit)?;
    Ok(Json(ranked))
}

#[derive(Debug, Deserialize)]
struct GraphParams {
    threshold: Option<f64>,
    k: Option<usize>,
    /// Comma-separated category ids; absent means every category.
    categories: Option<String>,
}

async fn whole_graph(
    State(st): Shared,
    q: Result<Query<GraphParams>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<Value> {
    let p = query(q)?;
    let threshold = p.threshold.unwrap_or(st.defaults.edge_threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ApiError::new("InvalidConfig", "threshold must lie in [0, 1]"));
    }
    let scope = match p.categories {
        None => Scope::All,
        Some(list) => Scope::categories(list.split(',').filter(|c| !c.is_empty())),
    };
    let graph = corpus_graph(
        &st.corpus,
        &st.thesaurus,
        &scope,
        threshold,
        p.k.unwrap_or(st.defaults.graph_k),
    )?;
    Ok(Json(serde_json::to_value(graph).expect("graph serializes")))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    #[serde(default)]
    restriction: Scope,
    #[serde(default)]
    config: Option<Value>,
}

async fn create_session(State(st): Shared, bytes: Bytes) -> ApiResult<NavigationSession> {
    let req: NewSession = body(&bytes)?;
    let config = st.config_with(req.config.as_ref())?;
    Ok(Json(st.open_session(req.restriction, config)?))
}

async fn list_sessions(State(st): Shared) -> Json<Vec<SessionId>> {
    Json(st.session_ids())
}

async fn get_session(State(st): Shared, Path(id): Path<String>) -> ApiResult<NavigationSession> {
    let handle = st.session(&id)?;
    let s = handle.lock().await;
    Ok(Json(s.clone()))
}

/// Response to a transition: the committed session and side results.
#[derive(Debug, Serialize, Deserialize)]
pub struct TransitionReply {
    pub session: NavigationSession,
    pub outcome: Outcome,
}

async fn transition(
    State(st): Shared,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<TransitionReply> {
    let t: Transition = serde_json::from_slice(&bytes).map_err(|e| ApiError::malformed(e.to_string()))?;
    let (session, outcome) = st.transition(&id, &t).await?;
    Ok(Json(TransitionReply { session, outcome }))
}

async fn session_part<T: Serialize>(
    st: &AppState,
    id: &str,
    pick: impl FnOnce(&NavigationSession) -> Result<T, ApiError>,
) -> ApiResult<T> {
    let handle = st.session(id)?;
    let s = handle.lock().await;
    pick(&s).map(Json)
}

async fn session_ranked(State(st): Shared, Path(id): Path<String>) -> ApiResult<Value> {
    session_part(&st, &id, |s| {
        s.ranked
            .as_ref()
            .map(|r| serde_json::to_value(r).expect("ranked list serializes"))
            .ok_or_else(|| ApiError::new("NoRankedList", "the session has no ranked list"))
    })
    .await
}

async fn session_mosaic(State(st): Shared, Path(id): Path<String>) -> ApiResult<Value> {
    session_part(&st, &id, |s| {
        s.mosaic
            .as_ref()
            .map(|m| serde_json::to_value(m).expect("mosaic serializes"))
            .ok_or_else(|| ApiError::new("NoMosaic", "the session has no mosaic"))
    })
    .await
}

async fn session_groups(State(st): Shared, Path(id): Path<String>) -> ApiResult<Value> {
    session_part(&st, &id, |s| {
        Ok(serde_json::to_value(&s.groups).expect("groups serialize"))
    })
    .await
}

async fn session_graph(State(st): Shared, Path(id): Path<String>) -> ApiResult<Value> {
    session_part(&st, &id, |s| {
        s.graph
            .as_ref()
            .map(|g| serde_json::to_value(g).expect("graph serializes"))
            .ok_or_else(|| ApiError::new("NoGraph", "the session has no graph"))
    })
    .await
}

async fn list_albums(State(st): Shared) -> ApiResult<Vec<Album>> {
    Ok(Json(st.albums.list()?))
}

async fn get_album(State(st): Shared, Path(id): Path<String>) -> ApiResult<Album> {
    st.albums
        .get(&id)?
        .map(Json)
        .ok_or_else(|| ApiError::new("UnknownAlbum", format!("unknown album {id}")))
}

/// `POST /albums` is transition i on the named session.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewAlbum {
    session: SessionId,
    origin: Origin,
    name: String,
    #[serde(default)]
    annotation: String,
}

async fn create_album(State(st): Shared, bytes: Bytes) -> ApiResult<TransitionReply> {
    let req: NewAlbum = body(&bytes)?;
    let t = Transition::I {
        origin: req.origin,
        name: req.name,
        annotation: req.annotation,
    };
    let (session, outcome) = st.transition(req.session.as_str(), &t).await?;
    Ok(Json(TransitionReply { session, outcome }))
}
