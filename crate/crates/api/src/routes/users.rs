use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use facdash_core::authz::{Action, CreationMode};
use facdash_core::domain::{DeletionReport, Role, UserId, UserProfile, UserView};
use facdash_core::{Error, FieldError};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::extract::{blocking, AppState, Caller, JsonBody, Paged, Params};

pub async fn list(State(state): State<AppState>, Caller(caller): Caller, params: Params) -> ApiResult<Json<Paged<UserView>>> {
    let page = params.page()?;
    let users = blocking(&state, move |p| p.list_users(&caller)).await?;
    Ok(Json(page.apply(users.iter().map(|u| u.view()).collect())))
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Manual,
    #[default]
    Invite,
}

#[derive(Deserialize)]
pub struct CreateBody {
    email: String,
    first_name: String,
    last_name: String,
    role: Role,
    #[serde(default)]
    mode: Mode,
    password: Option<String>,
}

#[derive(Serialize)]
pub struct Created {
    pub user: UserView,
    pub invite_sent: bool,
}

pub async fn create(
    State(state): State<AppState>,
    Caller(caller): Caller,
    JsonBody(body): JsonBody<CreateBody>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let mode = match (body.mode, body.password) {
        (Mode::Invite, _) => CreationMode::Invite,
        (Mode::Manual, Some(password)) => CreationMode::Manual { password },
        (Mode::Manual, None) => {
            return Err(ApiError::new("field-errors", "manual creation needs a password")
                .with_fields(vec![FieldError::new("password", "password is required")]))
        }
    };
    let profile = UserProfile {
        email: body.email,
        first_name: body.first_name,
        last_name: body.last_name,
        role: body.role,
    };
    let created = blocking(&state, move |p| p.create_user(&caller, profile, mode)).await?;
    Ok((
        StatusCode::CREATED,
        Json(Created {
            user: created.user.view(),
            invite_sent: created.invite.is_some(),
        }),
    ))
}

fn user_id(raw: &str) -> ApiResult<UserId> {
    raw.parse()
        .map_err(|_| ApiError::new("unknown-user", "no such user"))
}

#[derive(Deserialize)]
pub struct PatchBody {
    email: Option<String>,
    first_name: Option<String>,
    last_name: Option<String>,
    role: Option<Role>,
}

pub async fn update(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<PatchBody>,
) -> ApiResult<Json<UserView>> {
    let id = user_id(&id)?;
    let user = blocking(&state, move |p| {
        p.require(&caller, Action::ManageUsers, Some(id))?;
        let current = p.store().user(id)?.ok_or(Error::UnknownUser)?;
        let profile = UserProfile {
            email: body.email.unwrap_or(current.email),
            first_name: body.first_name.unwrap_or(current.first_name),
            last_name: body.last_name.unwrap_or(current.last_name),
            role: body.role.unwrap_or(current.role),
        };
        p.update_user(&caller, id, profile)
    })
    .await?;
    Ok(Json(user.view()))
}

pub async fn delete(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
) -> ApiResult<Json<DeletionReport>> {
    let id = user_id(&id)?;
    Ok(Json(blocking(&state, move |p| p.delete_user(&caller, id)).await?))
}
