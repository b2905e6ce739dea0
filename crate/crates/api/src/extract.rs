//! Request plumbing: session cookies, CSRF, query parameters and JSON bodies.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, FromRequestParts, Query, Request};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, Method};
use axum::Json;
use cookie::{Cookie, SameSite};
use facdash_core::authz::Principal;
use facdash_core::domain::{TermWindow, UserId};
use facdash_core::Platform;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{ApiError, ApiResult};

pub const SESSION_COOKIE: &str = "fd_session";
pub const CSRF_HEADER: &str = "x-csrf-token";

pub const DEFAULT_LIMIT: usize = 50;
pub const MAX_LIMIT: usize = 500;

#[derive(Clone)]
pub struct AppState {
    pub platform: Arc<Platform>,
    pub max_upload_bytes: usize,
    /// Adds `Secure` to the session cookie.
    pub secure_cookies: bool,
}

/// Runs a store-touching core call off the async workers.
pub async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    F: FnOnce(&Platform) -> facdash_core::Result<T> + Send + 'static,
    T: Send + 'static,
{
    let platform = state.platform.clone();
    tokio::task::spawn_blocking(move || f(&platform))
        .await
        .map_err(|_| ApiError::internal())?
        .map_err(ApiError::from)
}

pub fn session_cookie(headers: &HeaderMap) -> Option<String> {
    headers
        .get_all(header::COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(Cookie::split_parse)
        .filter_map(Result::ok)
        .find(|c| c.name() == SESSION_COOKIE)
        .map(|c| c.value().to_string())
}

pub fn set_session_cookie(state: &AppState, value: &str, max_age_secs: i64) -> String {
    Cookie::build((SESSION_COOKIE, value.to_string()))
        .path("/")
        .http_only(true)
        .same_site(SameSite::Strict)
        .secure(state.secure_cookies)
        .max_age(cookie::time::Duration::seconds(max_age_secs))
        .build()
        .to_string()
}

pub fn clear_session_cookie(state: &AppState) -> String {
    set_session_cookie(state, "", 0)
}

/// An authenticated caller. Mutating requests must also echo the
/// session's CSRF token in `X-CSRF-Token`.
pub struct Caller(pub Principal);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> ApiResult<Self> {
        let session_id = session_cookie(&parts.headers)
            .ok_or_else(|| ApiError::from(facdash_core::Error::NotAuthenticated))?;
        let principal = blocking(state, move |p| p.authenticate(&session_id)).await?;
        let safe = matches!(parts.method, Method::GET | Method::HEAD | Method::OPTIONS);
        if !safe {
            let echoed = parts.headers.get(CSRF_HEADER).and_then(|v| v.to_str().ok());
            if echoed != Some(principal.csrf_token.as_str()) {
                return Err(ApiError::new("csrf-mismatch", "missing or wrong X-CSRF-Token header"));
            }
        }
        Ok(Caller(principal))
    }
}

/// Query parameters, parsed on demand so every failure has the same shape.
pub struct Params(HashMap<String, String>);

impl<S: Send + Sync> FromRequestParts<S> for Params {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> ApiResult<Self> {
        let Query(map) = Query::<HashMap<String, String>>::from_request_parts(parts, state)
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        Ok(Params(map))
    }
}

impl Params {
    pub fn text(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(|s| s.trim()).filter(|s| !s.is_empty())
    }

    pub fn parsed<T: std::str::FromStr>(&self, name: &str) -> ApiResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.text(name)
            .map(|raw| {
                raw.parse()
                    .map_err(|e| ApiError::bad_request(format!("invalid `{name}`: {e}")))
            })
            .transpose()
    }

    pub fn required<T: std::str::FromStr>(&self, name: &str) -> ApiResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(name)?
            .ok_or_else(|| ApiError::bad_request(format!("`{name}` is required")))
    }

    pub fn subject(&self) -> ApiResult<Option<UserId>> {
        self.parsed("subject")
    }

    /// All time when absent.
    pub fn window(&self) -> ApiResult<TermWindow> {
        Ok(self.parsed("window")?.unwrap_or_else(TermWindow::all_time))
    }

    pub fn page(&self) -> ApiResult<Page> {
        Ok(Page {
            limit: self.parsed::<usize>("limit")?.unwrap_or(DEFAULT_LIMIT).min(MAX_LIMIT),
            offset: self.parsed::<usize>("offset")?.unwrap_or(0),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Page {
    pub limit: usize,
    pub offset: usize,
}

#[derive(Debug, Serialize)]
pub struct Paged<T> {
    pub items: Vec<T>,
    pub total: usize,
    pub limit: usize,
    pub offset: usize,
}

impl Page {
    pub fn apply<T>(self, all: Vec<T>) -> Paged<T> {
        let total = all.len();
        let items = all.into_iter().skip(self.offset).take(self.limit).collect();
        Paged {
            items,
            total,
            limit: self.limit,
            offset: self.offset,
        }
    }
}

/// `Json` with rejections rendered as API errors.
pub struct JsonBody<T>(pub T);

impl<S, T> FromRequest<S> for JsonBody<T>
where
    S: Send + Sync,
    T: DeserializeOwned,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> ApiResult<Self> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(JsonBody(v)),
            Err(JsonRejection::MissingJsonContentType(_)) => Err(ApiError::new(
                "unsupported-content-type",
                "expected an application/json body",
            )),
            Err(e) => Err(ApiError::bad_request(e.body_text())),
        }
    }
}
