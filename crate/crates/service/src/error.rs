use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lumiref_core::catalog::{CatalogError, Violation};
use lumiref_core::navigation::{NavError, StoreError};
use lumiref_core::thesaurus::ThesaurusError;
use lumiref_core::vsm::VsmError;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Error body returned by every endpoint and printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new("MalformedRequest", message)
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new("UnknownSession", format!("unknown session {id}"))
    }

    pub fn status(&self) -> StatusCode {
        status_of(&self.code)
    }
}

/// HTTP status for a stable error code.
pub fn status_of(code: &str) -> StatusCode {
    match code {
        "MalformedRequest" | "MalformedFile" => StatusCode::BAD_REQUEST,
        "UnknownImage" | "UnknownNode" | "UnknownAlbum" | "UnknownSession" | "NotFound" => StatusCode::NOT_FOUND,
        "NoGraph" | "NoMosaic" | "NoRankedList" | "NoSource" | "EmptySource" | "NoFeedback"
        | "AlbumFullyStale" | "DegenerateQuery" | "EmptyCorpus" => StatusCode::CONFLICT,
        "StoreFailure" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}

impl From<NavError> for ApiError {
    fn from(e: NavError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl From<VsmError> for ApiError {
    fn from(e: VsmError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::new("StoreFailure", e.to_string())
    }
}

impl From<ThesaurusError> for ApiError {
    fn from(e: ThesaurusError) -> Self {
        Self::new(e.code(), e.to_string())
    }
}

fn violations_detail(violations: &[Violation]) -> Value {
    Value::Array(
        violations
            .iter()
            .map(|v| serde_json::json!({"code": v.code(), "message": v.to_string()}))
            .collect(),
    )
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let detail = violations_detail(e.violations());
        let err = Self::new(e.code(), e.to_string());
        if e.violations().is_empty() {
            err
        } else {
            err.with_detail(detail)
        }
    }
}

impl From<Vec<Violation>> for ApiError {
    fn from(violations: Vec<Violation>) -> Self {
        let code = violations.first().map_or("InvalidQuery", |v| v.code());
        let message = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Self::new(code, message).with_detail(violations_detail(&violations))
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}
