use std::collections::BTreeMap;

use axum::extract::State;
use axum::http::StatusCode;
use axum::Json;
use facdash_core::domain::{ResearchItem, ResearchKind};
use serde_json::Value;

use crate::error::{ApiError, ApiResult};
use crate::extract::{blocking, AppState, Caller, JsonBody, Paged, Params};

async fn list(
    state: AppState,
    caller: facdash_core::authz::Principal,
    kind: ResearchKind,
    params: Params,
) -> ApiResult<Json<Paged<ResearchItem>>> {
    let subject = params.subject()?;
    let query = params.text("q").map(str::to_string);
    let page = params.page()?;
    let items = blocking(&state, move |p| {
        p.list_research(&caller, kind, subject, query.as_deref())
    })
    .await?;
    Ok(Json(page.apply(items)))
}

/// Form values arrive as strings; plain numbers are accepted too.
fn form_fields(body: BTreeMap<String, Value>) -> ApiResult<BTreeMap<String, String>> {
    body.into_iter()
        .filter_map(|(k, v)| match v {
            Value::Null => None,
            Value::String(s) => Some(Ok((k, s))),
            Value::Number(n) => Some(Ok((k, n.to_string()))),
            _ => Some(Err(ApiError::bad_request(format!("`{k}` must be a string")))),
        })
        .collect()
}

async fn create(
    state: AppState,
    caller: facdash_core::authz::Principal,
    kind: ResearchKind,
    body: BTreeMap<String, Value>,
) -> ApiResult<(StatusCode, Json<ResearchItem>)> {
    let fields = form_fields(body)?;
    let item = blocking(&state, move |p| p.report_research(&caller, kind, &fields)).await?;
    Ok((StatusCode::CREATED, Json(item)))
}

macro_rules! research_routes {
    ($list:ident, $create:ident, $kind:expr) => {
        pub async fn $list(
            State(state): State<AppState>,
            Caller(caller): Caller,
            params: Params,
        ) -> ApiResult<Json<Paged<ResearchItem>>> {
            list(state, caller, $kind, params).await
        }

        pub async fn $create(
            State(state): State<AppState>,
            Caller(caller): Caller,
            JsonBody(body): JsonBody<BTreeMap<String, Value>>,
        ) -> ApiResult<(StatusCode, Json<ResearchItem>)> {
            create(state, caller, $kind, body).await
        }
    };
}

research_routes!(list_grants, create_grant, ResearchKind::Grant);
research_routes!(list_publications, create_publication, ResearchKind::Publication);
research_routes!(list_expenditures, create_expenditure, ResearchKind::Expenditure);
