//! Evaluation sheet uploads and research form submissions.

mod research;
mod workbook;

use std::collections::{BTreeMap, HashMap};

use tracing::info;

pub use research::validate_research_item;
pub use workbook::{
    parse_eval_workbook, write_canonical_csv, ParseReport, ParseTotals, RowError, WorkbookFormat,
    COLUMNS,
};

use crate::authz::{Action, Principal};
use crate::domain::{ResearchItem, ResearchKind, Scope, UpsertSummary, UserId};
use crate::error::{Error, Result};
use crate::platform::Platform;

impl Platform {
    /// Parses an upload, resolving instructor emails within the chair's department.
    pub fn parse_upload(
        &self,
        caller: &Principal,
        payload: &[u8],
        format: WorkbookFormat,
    ) -> Result<ParseReport> {
        self.require(caller, Action::UploadEvaluations, None)?;
        let members: HashMap<String, UserId> = self
            .store
            .department_users(&caller.department_id)?
            .into_iter()
            .map(|u| (u.email, u.user_id))
            .collect();
        parse_eval_workbook(payload, format, &|email| members.get(email).copied())
    }

    pub fn commit_evals(&self, caller: &Principal, report: &ParseReport) -> Result<UpsertSummary> {
        self.require(caller, Action::UploadEvaluations, None)?;
        if report.accepted.is_empty() {
            return Err(Error::EmptyBatch);
        }
        for instructor in workbook::instructors(report) {
            self.require(caller, Action::UploadEvaluations, Some(instructor))?;
        }
        let summary = self.store.upsert_evaluations(&report.accepted)?;
        info!(
            by = %caller.user_id,
            inserted = summary.inserted,
            replaced = summary.replaced,
            "evaluations committed"
        );
        Ok(summary)
    }

    /// Validates and stores a research item owned by the caller.
    pub fn report_research(
        &self,
        caller: &Principal,
        kind: ResearchKind,
        fields: &BTreeMap<String, String>,
    ) -> Result<ResearchItem> {
        self.require(caller, Action::ReportResearch, None)?;
        let item = validate_research_item(kind, fields, caller.user_id)?;
        self.store.insert_research_item(&item)?;
        Ok(item)
    }

    /// Research items of `subject` (the caller when absent), filtered by `query`.
    pub fn list_research(
        &self,
        caller: &Principal,
        kind: ResearchKind,
        subject: Option<UserId>,
        query: Option<&str>,
    ) -> Result<Vec<ResearchItem>> {
        self.require(caller, Action::ViewResearch, subject)?;
        let mut scope = Scope::owner(subject.unwrap_or(caller.user_id));
        if let Some(q) = query {
            scope = scope.with_query(q);
        }
        self.store.research_items(kind, &scope)
    }
}
