use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use zalmtwin_core::Error;

/// Machine-readable error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub field: Option<String>,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, field: Option<String>, message: String) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_owned(),
                field,
                message,
                diagnostics: Vec::new(),
            },
        }
    }

    pub fn malformed(field: Option<String>, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed_request", field, message.into())
    }

    pub fn numerical(message: impl Into<String>, diagnostics: Vec<String>) -> Self {
        let mut e = Self::new(StatusCode::INTERNAL_SERVER_ERROR, "numerical_failure", None, message.into());
        e.body.diagnostics = diagnostics;
        e
    }

    pub fn from_engine(err: Error) -> Self {
        match &err {
            Error::Domain { field, .. } => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "out_of_range",
                Some((*field).to_owned()),
                err.to_string(),
            ),
            Error::Contract(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "unsupported", None, err.to_string()),
            Error::Numerical(_) | Error::UndefinedFidelity => Self::numerical(err.to_string(), vec![format!("{err:?}")]),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
