use axum::body::Body;
use axum::extract::{FromRequest, Multipart, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use facdash_core::domain::{DeletionReport, UserView};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::extract::{
    blocking, clear_session_cookie, set_session_cookie, AppState, Caller, JsonBody,
};

#[derive(Deserialize)]
pub struct LoginBody {
    email: String,
    password: String,
}

#[derive(Serialize)]
pub struct SessionInfo {
    pub user: UserView,
    pub csrf_token: String,
}

pub async fn login(State(state): State<AppState>, JsonBody(body): JsonBody<LoginBody>) -> ApiResult<Response> {
    let (session, user) = blocking(&state, move |p| p.login(&body.email, &body.password)).await?;
    let max_age = (session.expires_at - session.created_at).num_seconds();
    let cookie = set_session_cookie(&state, &session.session_id, max_age);
    let info = SessionInfo {
        user: user.view(),
        csrf_token: session.csrf_token,
    };
    Ok(([(header::SET_COOKIE, cookie)], Json(info)).into_response())
}

pub async fn logout(State(state): State<AppState>, Caller(caller): Caller) -> ApiResult<Response> {
    blocking(&state, move |p| p.logout(&caller.session_id)).await?;
    Ok((StatusCode::NO_CONTENT, [(header::SET_COOKIE, clear_session_cookie(&state))]).into_response())
}

pub async fn me(State(state): State<AppState>, Caller(caller): Caller) -> ApiResult<Json<SessionInfo>> {
    let csrf_token = caller.csrf_token.clone();
    let user = blocking(&state, move |p| p.me(&caller)).await?;
    Ok(Json(SessionInfo {
        user: user.view(),
        csrf_token,
    }))
}

#[derive(Deserialize)]
pub struct PasswordBody {
    old_password: String,
    new_password: String,
}

pub async fn change_password(
    State(state): State<AppState>,
    Caller(caller): Caller,
    JsonBody(body): JsonBody<PasswordBody>,
) -> ApiResult<StatusCode> {
    blocking(&state, move |p| {
        p.change_password(&caller, &body.old_password, &body.new_password)
    })
    .await?;
    Ok(StatusCode::NO_CONTENT)
}

/// Reads the multipart part called `name`, with its declared content type
/// and file name.
pub(crate) async fn multipart_part(
    req: Request,
    state: &AppState,
    name: &str,
) -> ApiResult<(Option<String>, Option<String>, Vec<u8>)> {
    let mut form = Multipart::from_request(req, state)
        .await
        .map_err(|_| ApiError::new("unsupported-content-type", "expected a multipart/form-data body"))?;
    loop {
        let field = form.next_field().await.map_err(multipart_error)?;
        let Some(field) = field else {
            return Err(ApiError::new("field-errors", format!("no `{name}` part in the form"))
                .with_fields(vec![facdash_core::FieldError::new(name, "part is missing")]));
        };
        if field.name() != Some(name) {
            continue;
        }
        let content_type = field.content_type().map(str::to_string);
        let file_name = field.file_name().map(str::to_string);
        let bytes = field.bytes().await.map_err(multipart_error)?;
        return Ok((content_type, file_name, bytes.to_vec()));
    }
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new("payload-too-large", "the upload exceeds the size limit")
    } else {
        ApiError::bad_request(e.body_text())
    }
}

pub async fn put_photo(State(state): State<AppState>, Caller(caller): Caller, req: Request) -> ApiResult<StatusCode> {
    let (content_type, _, bytes) = multipart_part(req, &state, "photo").await?;
    let content_type = content_type
        .filter(|ct| ct.starts_with("image/"))
        .ok_or_else(|| ApiError::new("unsupported-content-type", "the photo must be an image"))?;
    blocking(&state, move |p| p.set_profile_image(&caller, &content_type, &bytes)).await?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn get_photo(State(state): State<AppState>, Caller(caller): Caller) -> ApiResult<Response> {
    let (content_type, bytes) = blocking(&state, move |p| p.profile_image(&caller)).await?;
    Ok(([(header::CONTENT_TYPE, content_type)], Body::from(bytes)).into_response())
}

pub async fn delete_data(State(state): State<AppState>, Caller(caller): Caller) -> ApiResult<Response> {
    let report: DeletionReport = blocking(&state, move |p| p.delete_own_data(&caller)).await?;
    Ok(([(header::SET_COOKIE, clear_session_cookie(&state))], Json(report)).into_response())
}

#[derive(Deserialize)]
pub struct RedeemBody {
    password: String,
}

pub async fn redeem_invite(
    State(state): State<AppState>,
    Path(token): Path<String>,
    JsonBody(body): JsonBody<RedeemBody>,
) -> ApiResult<Json<serde_json::Value>> {
    let user = blocking(&state, move |p| p.redeem_invite(&token, &body.password)).await?;
    Ok(Json(serde_json::json!({ "user": user.view() })))
}
