use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use facdash_core::{Error, FieldError};
use serde::Serialize;
use tracing::error;

/// The JSON error body every endpoint returns on failure.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "status_code")]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<FieldError>>,
}

fn status_code<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

/// Every code the service can emit, with its status.
pub const CODES: &[(&str, u16)] = &[
    ("bad-request", 400),
    ("invalid-token", 400),
    ("not-authenticated", 401),
    ("invalid-credentials", 401),
    ("wrong-role", 403),
    ("out-of-scope", 403),
    ("account-pending", 403),
    ("csrf-mismatch", 403),
    ("not-found", 404),
    ("unknown-user", 404),
    ("unknown-kind", 404),
    ("method-not-allowed", 405),
    ("duplicate-email", 409),
    ("payload-too-large", 413),
    ("invariant-violation", 422),
    ("field-errors", 422),
    ("weak-password", 422),
    ("unsupported-content-type", 422),
    ("unreadable-payload", 422),
    ("missing-header", 422),
    ("empty-batch", 422),
    ("insufficient-cohort", 422),
    ("degenerate-sample", 422),
    ("internal", 500),
    ("mail-failure", 502),
];

impl ApiError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        let status = CODES
            .iter()
            .find(|(c, _)| *c == code)
            .map(|(_, s)| StatusCode::from_u16(*s).expect("valid status"))
            .unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        Self {
            status,
            code,
            message: message.into(),
            fields: None,
        }
    }

    pub fn with_fields(mut self, fields: Vec<FieldError>) -> Self {
        self.fields = Some(fields);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new("bad-request", message)
    }

    pub fn not_found() -> Self {
        Self::new("not-found", "no such resource")
    }

    pub fn internal() -> Self {
        Self::new("internal", "internal error")
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match e.code() {
            // Never reachable through valid requests; treat as server faults.
            "value-not-member" | "mixed-section" => "internal",
            c => c,
        };
        if code == "internal" {
            error!(error = %e, "request failed");
            return ApiError::internal();
        }
        if code == "mail-failure" {
            error!(error = %e, "mail dispatch failed");
            return ApiError::new(code, "the invitation email could not be sent");
        }
        let fields = match &e {
            Error::MissingHeader(cols) => Some(
                cols.iter()
                    .map(|c| FieldError::new(c.clone(), "column is missing"))
                    .collect(),
            ),
            other => other.field_errors().map(<[FieldError]>::to_vec),
        };
        ApiError {
            fields,
            ..ApiError::new(code, e.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
