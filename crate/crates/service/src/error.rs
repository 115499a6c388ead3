use axum::extract::{FromRequest, Request};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use adscribe_core::Error;

/// Error body returned by every endpoint.
#[derive(Clone, Debug, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "status_code")]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

fn status_code<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_owned(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn provider_unavailable() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "ProviderUnavailable",
            "no model provider is configured for this server",
        )
    }
}

/// HTTP status for each core error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "UnknownVideo" | "UnknownVariation" | "UnknownDescription" => StatusCode::NOT_FOUND,
        "DuplicateName" | "OrderingViolation" | "HasChildren" | "NoPendingProposal" => {
            StatusCode::CONFLICT
        }
        "EmptyText" | "EmptyName" | "OutOfBounds" | "InvalidTagSet" | "EmptyAudio"
        | "TooFewFrames" | "InvalidInput" | "EmptyPrompt" | "DimensionMismatch" | "ZeroVector"
        | "MalformedWebVTT" | "MissingMedia" | "DecoderFailure" => StatusCode::UNPROCESSABLE_ENTITY,
        "ProviderFailure" | "UnparseableResponse" => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = e.code();
        let detail = match &e {
            Error::OutOfBounds {
                start_ms,
                end_ms,
                duration_ms,
            } => Some(json!({"start_ms": start_ms, "end_ms": end_ms, "duration_ms": duration_ms})),
            Error::InvalidTagSet(v) => serde_json::to_value(v).ok(),
            Error::MalformedWebVtt { line, column, .. } => {
                Some(json!({"line": line, "column": column}))
            }
            Error::DecoderFailure { status, output } => {
                Some(json!({"status": status, "output": output}))
            }
            Error::InvariantViolation { path, .. } => Some(json!({"path": path})),
            _ => None,
        };
        ApiError {
            status: status_for(code),
            code: code.to_owned(),
            message: e.to_string(),
            detail,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

/// JSON request body whose rejections are reported as [`ApiError`]s.
pub struct JsonBody<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for JsonBody<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| JsonBody(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
