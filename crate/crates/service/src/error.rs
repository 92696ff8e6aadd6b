use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),

    #[error("unknown item {0:?}")]
    UnknownItem(String),

    #[error("{0}")]
    BadRequest(String),

    #[error(transparent)]
    Core(#[from] relfeed_core::Error),

    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

impl ServiceError {
    pub fn status_and_code(&self) -> (StatusCode, &'static str) {
        use relfeed_core::Error as E;
        match self {
            ServiceError::UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            ServiceError::UnknownDataset(_) => (StatusCode::NOT_FOUND, "unknown_dataset"),
            ServiceError::UnknownItem(_) => (StatusCode::NOT_FOUND, "unknown_item"),
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, "invalid_request"),
            ServiceError::Core(E::NotDisplayed(_)) => (StatusCode::BAD_REQUEST, "not_displayed"),
            ServiceError::Core(E::SessionFinished) => (StatusCode::CONFLICT, "session_finished"),
            ServiceError::Core(E::RoundLimit(_)) => (StatusCode::CONFLICT, "round_limit"),
            ServiceError::Core(E::Io { .. } | E::Snapshot(_)) | ServiceError::Internal(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
            ServiceError::Core(_) => (StatusCode::BAD_REQUEST, "invalid_request"),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code) = self.status_and_code();
        let body = ErrorBody {
            code,
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}
