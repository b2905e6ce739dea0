use axum::extract::{Path, Request, State};
use axum::Json;
use facdash_core::analytics::{
    CourseAnalytics, DashboardSummary, Metric, SectionAverages, SectionDetail, TeamFilters,
    TeamSummaryRow,
};
use facdash_core::domain::{CourseCode, UpsertSummary};
use facdash_core::ingest::{ParseTotals, RowError, WorkbookFormat};
use facdash_core::FieldError;
use serde::Serialize;

use super::account::multipart_part;
use crate::error::{ApiError, ApiResult};
use crate::extract::{blocking, AppState, Caller, Paged, Params};

pub async fn dashboard(State(state): State<AppState>, Caller(caller): Caller) -> ApiResult<Json<DashboardSummary>> {
    Ok(Json(blocking(&state, move |p| p.dashboard_summary(&caller)).await?))
}

pub async fn list_sections(
    State(state): State<AppState>,
    Caller(caller): Caller,
    params: Params,
) -> ApiResult<Json<Paged<SectionAverages>>> {
    let subject = params.subject()?;
    let window = params.window()?;
    let page = params.page()?;
    let all = blocking(&state, move |p| p.evaluation_sections(&caller, subject, &window)).await?;
    Ok(Json(page.apply(all)))
}

pub async fn section_questions(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path((course, section)): Path<(String, String)>,
    params: Params,
) -> ApiResult<Json<Vec<SectionDetail>>> {
    let course: CourseCode = course
        .parse()
        .map_err(|e: String| ApiError::bad_request(format!("invalid course: {e}")))?;
    let subject = params.subject()?;
    let window = params.window()?;
    let details = blocking(&state, move |p| {
        p.section_details(&caller, subject, &course, &section, &window)
    })
    .await?;
    if details.is_empty() {
        return Err(ApiError::not_found());
    }
    Ok(Json(details))
}

pub async fn course_analytics(
    State(state): State<AppState>,
    Caller(caller): Caller,
    params: Params,
) -> ApiResult<Json<CourseAnalytics>> {
    let course: CourseCode = params.required("course")?;
    let window = params.window()?;
    let metric = params.parsed("metric")?.unwrap_or(Metric::Course);
    let subject = params.subject()?;
    let analytics = blocking(&state, move |p| {
        p.course_distribution(&caller, &course, &window, metric, subject)
    })
    .await?;
    Ok(Json(analytics))
}

pub async fn team(
    State(state): State<AppState>,
    Caller(caller): Caller,
    params: Params,
) -> ApiResult<Json<Paged<TeamSummaryRow>>> {
    let window = params.window()?;
    let filters = TeamFilters {
        name_query: params.text("name_q").map(str::to_string),
        course_query: params.text("course_q").map(str::to_string),
    };
    let page = params.page()?;
    let rows = blocking(&state, move |p| p.team_summary(&caller, &window, &filters)).await?;
    Ok(Json(page.apply(rows)))
}

#[derive(Debug, Serialize)]
pub struct UploadOutcome {
    pub totals: ParseTotals,
    pub rejected: Vec<RowError>,
    /// Absent on a dry run.
    pub summary: Option<UpsertSummary>,
}

fn upload_format(content_type: Option<&str>, file_name: Option<&str>) -> Option<WorkbookFormat> {
    if let Some(format) = file_name.and_then(WorkbookFormat::from_file_name) {
        return Some(format);
    }
    let essence = content_type?.split(';').next()?.trim().to_ascii_lowercase();
    match essence.as_str() {
        "text/csv" | "application/csv" => Some(WorkbookFormat::Csv),
        "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet" => Some(WorkbookFormat::Xlsx),
        _ => None,
    }
}

pub async fn upload(
    State(state): State<AppState>,
    Caller(caller): Caller,
    params: Params,
    req: Request,
) -> ApiResult<Json<UploadOutcome>> {
    let dry_run = params.parsed::<bool>("dry_run")?.unwrap_or(false);
    // Check the role before reading what may be a large body.
    let who = caller.clone();
    blocking(&state, move |p| {
        p.require(&who, facdash_core::authz::Action::UploadEvaluations, None)
    })
    .await?;
    let (content_type, file_name, bytes) = multipart_part(req, &state, "file").await?;
    let format = upload_format(content_type.as_deref(), file_name.as_deref()).ok_or_else(|| {
        ApiError::new("unsupported-content-type", "upload a .xlsx or .csv file")
    })?;
    let (report, summary) = blocking(&state, move |p| {
        let report = p.parse_upload(&caller, &bytes, format)?;
        if report.accepted.is_empty() {
            return Ok((report, None));
        }
        let summary = if dry_run { None } else { Some(p.commit_evals(&caller, &report)?) };
        Ok((report, summary))
    })
    .await?;
    if report.accepted.is_empty() {
        let fields = report
            .rejected
            .iter()
            .map(|r| FieldError::new(r.field.clone(), format!("row {}: {}", r.row_number, r.message)))
            .collect();
        return Err(ApiError::new("empty-batch", "no row in the upload was valid").with_fields(fields));
    }
    Ok(Json(UploadOutcome {
        totals: report.totals,
        rejected: report.rejected,
        summary,
    }))
}
