//! HTTP service for the faculty dashboard.
//!
//! Everything lives under `/api`; JSON in and out, except the multipart
//! uploads and the profile photo. Endpoints are described in `openapi.json`
//! at the crate root.

pub mod config;
pub mod error;
pub mod extract;
pub mod mailer;
mod routes;

use std::path::PathBuf;

use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue};
use axum::routing::{get, post, put};
use axum::Router;
use tower_http::services::{ServeDir, ServeFile};
use tower_http::set_header::SetResponseHeaderLayer;

pub use error::{ApiError, ApiResult, CODES};
pub use extract::{AppState, CSRF_HEADER, SESSION_COOKIE};

use routes::{account, evals, research, users};

/// Every (method, path) the service answers, in `openapi.json` path syntax.
pub const ROUTES: &[(&str, &str)] = &[
    ("POST", "/api/session"),
    ("DELETE", "/api/session"),
    ("GET", "/api/me"),
    ("PATCH", "/api/me/password"),
    ("PUT", "/api/me/photo"),
    ("GET", "/api/me/photo"),
    ("DELETE", "/api/me/data"),
    ("GET", "/api/dashboard"),
    ("GET", "/api/evals"),
    ("GET", "/api/evals/{course}/{section}/questions"),
    ("POST", "/api/evals/upload"),
    ("GET", "/api/analytics/course"),
    ("GET", "/api/grants"),
    ("POST", "/api/grants"),
    ("GET", "/api/publications"),
    ("POST", "/api/publications"),
    ("GET", "/api/expenditures"),
    ("POST", "/api/expenditures"),
    ("GET", "/api/team"),
    ("GET", "/api/users"),
    ("POST", "/api/users"),
    ("PATCH", "/api/users/{id}"),
    ("DELETE", "/api/users/{id}"),
    ("POST", "/api/invites/{token}/redeem"),
];

async fn api_not_found() -> ApiError {
    ApiError::not_found()
}

async fn api_method_not_allowed() -> ApiError {
    ApiError::new("method-not-allowed", "method not allowed on this resource")
}

fn api(state: AppState) -> Router {
    Router::new()
        .route("/session", post(account::login).delete(account::logout))
        .route("/me", get(account::me))
        .route("/me/password", axum::routing::patch(account::change_password))
        .route("/me/photo", put(account::put_photo).get(account::get_photo))
        .route("/me/data", axum::routing::delete(account::delete_data))
        .route("/dashboard", get(evals::dashboard))
        .route("/evals", get(evals::list_sections))
        .route("/evals/upload", post(evals::upload))
        .route("/evals/{course}/{section}/questions", get(evals::section_questions))
        .route("/analytics/course", get(evals::course_analytics))
        .route("/grants", get(research::list_grants).post(research::create_grant))
        .route(
            "/publications",
            get(research::list_publications).post(research::create_publication),
        )
        .route(
            "/expenditures",
            get(research::list_expenditures).post(research::create_expenditure),
        )
        .route("/team", get(evals::team))
        .route("/users", get(users::list).post(users::create))
        .route("/users/{id}", axum::routing::patch(users::update).delete(users::delete))
        .route("/invites/{token}/redeem", post(account::redeem_invite))
        .fallback(api_not_found)
        .method_not_allowed_fallback(api_method_not_allowed)
        .layer(DefaultBodyLimit::max(state.max_upload_bytes))
        .layer(SetResponseHeaderLayer::overriding(
            header::CACHE_CONTROL,
            HeaderValue::from_static("no-store"),
        ))
        .with_state(state)
}

/// The whole service. With `static_dir`, non-API paths serve the built UI,
/// falling back to its `index.html` for client-side routes.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let app = Router::new().nest("/api", api(state));
    match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            app.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => app.fallback(api_not_found),
    }
}
