use serde::Serialize;
use thiserror::Error;

/// A validation failure attached to one named input field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Errors produced by the pure statistics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample has fewer than two points or zero spread")]
    DegenerateSample,
    #[error("value is not a member of the population")]
    ValueNotMember,
    #[error("records do not all belong to the same section")]
    MixedSection,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("record violates its invariants")]
    InvariantViolation(Vec<FieldError>),
    #[error("invalid field values")]
    FieldErrors(Vec<FieldError>),
    #[error("an account with this email already exists")]
    DuplicateEmail,
    #[error("unknown user")]
    UnknownUser,
    #[error("unknown record kind `{0}`")]
    UnknownKind(String),
    #[error("not found")]
    NotFound,

    #[error("password must be at least {min} characters")]
    WeakPassword { min: usize },
    #[error("invalid email or password")]
    InvalidCredentials,
    #[error("account has not been activated yet")]
    AccountPending,
    #[error("invalid or expired token")]
    InvalidToken,
    #[error("not authenticated")]
    NotAuthenticated,
    #[error("action not permitted for this role")]
    WrongRole,
    #[error("subject is outside the caller's scope")]
    OutOfScope,

    #[error("payload is not a readable workbook: {0}")]
    UnreadablePayload(String),
    #[error("missing required columns: {}", .0.join(", "))]
    MissingHeader(Vec<String>),
    #[error("no accepted records to commit")]
    EmptyBatch,

    #[error("cohort of {n} is below the minimum of {min}")]
    InsufficientCohort { n: usize, min: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),

    #[error("mail dispatch failed: {0}")]
    Mail(String),
    #[error("storage error: {0}")]
    Storage(#[from] rusqlite::Error),
    #[error("storage schema error: {0}")]
    Schema(String),
}

impl Error {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvariantViolation(_) => "invariant-violation",
            Error::FieldErrors(_) => "field-errors",
            Error::DuplicateEmail => "duplicate-email",
            Error::UnknownUser => "unknown-user",
            Error::UnknownKind(_) => "unknown-kind",
            Error::NotFound => "not-found",
            Error::WeakPassword { .. } => "weak-password",
            Error::InvalidCredentials => "invalid-credentials",
            Error::AccountPending => "account-pending",
            Error::InvalidToken => "invalid-token",
            Error::NotAuthenticated => "not-authenticated",
            Error::WrongRole => "wrong-role",
            Error::OutOfScope => "out-of-scope",
            Error::UnreadablePayload(_) => "unreadable-payload",
            Error::MissingHeader(_) => "missing-header",
            Error::EmptyBatch => "empty-batch",
            Error::InsufficientCohort { .. } => "insufficient-cohort",
            Error::Stats(StatsError::DegenerateSample) => "degenerate-sample",
            Error::Stats(StatsError::ValueNotMember) => "value-not-member",
            Error::Stats(StatsError::MixedSection) => "mixed-section",
            Error::Mail(_) => "mail-failure",
            Error::Storage(_) | Error::Schema(_) => "internal",
        }
    }

    /// Per-field detail, when the error carries any.
    pub fn field_errors(&self) -> Option<&[FieldError]> {
        match self {
            Error::InvariantViolation(f) | Error::FieldErrors(f) => Some(f),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
