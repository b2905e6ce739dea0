//! Persistent entities and the vocabulary shared by every other module.

pub(crate) mod course;
mod evaluation;
mod ids;
mod research;
mod user;

use std::str::FromStr;

use serde::Serialize;

pub use course::{CourseCode, CourseKey, Term, TermWindow, TermYear, MAX_YEAR, MIN_YEAR};
pub use evaluation::{EvaluationRecord, InstructorRef, QuestionCategory};
pub use ids::{DepartmentId, ItemId, TombstoneId, UserId};
pub use research::{Cents, ResearchDetails, ResearchItem, ResearchKind};
pub use user::{
    normalize_email, AccountStatus, Credential, ImageRef, InviteToken, Role, UserAccount,
    UserProfile, UserView,
};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    User,
    Evaluation,
    Research(ResearchKind),
}

impl FromStr for RecordKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "user" | "users" => RecordKind::User,
            "evaluation" | "evaluations" | "evals" => RecordKind::Evaluation,
            "grant" | "grants" => RecordKind::Research(ResearchKind::Grant),
            "publication" | "publications" => RecordKind::Research(ResearchKind::Publication),
            "expenditure" | "expenditures" => RecordKind::Research(ResearchKind::Expenditure),
            _ => return Err(Error::UnknownKind(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    User(UserAccount),
    Evaluation(EvaluationRecord),
    Research(ResearchItem),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::User(_) => RecordKind::User,
            Record::Evaluation(_) => RecordKind::Evaluation,
            Record::Research(item) => RecordKind::Research(item.kind()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredId {
    User(UserId),
    Evaluation(i64),
    Item(ItemId),
}

/// Which records a query may return.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    /// Owners (or instructors, for evaluations) whose records are in scope.
    pub owners: Vec<UserId>,
    /// Case-insensitive substring over title/description-like fields.
    /// Empty means no filter.
    pub query: Option<String>,
    pub window: Option<TermWindow>,
}

impl Scope {
    pub fn owner(owner: UserId) -> Self {
        Self {
            owners: vec![owner],
            ..Self::default()
        }
    }

    pub fn with_query(mut self, q: impl Into<String>) -> Self {
        self.query = Some(q.into());
        self
    }

    pub fn with_window(mut self, window: TermWindow) -> Self {
        self.window = Some(window);
        self
    }

    pub(crate) fn matches_text<'a>(&self, fields: impl IntoIterator<Item = &'a str>) -> bool {
        match self.query.as_deref().map(str::trim) {
            None | Some("") => true,
            Some(q) => {
                let q = q.to_lowercase();
                fields.into_iter().any(|f| f.to_lowercase().contains(&q))
            }
        }
    }
}

/// Counts of what a cascading user deletion removed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DeletionReport {
    pub grants: u64,
    pub publications: u64,
    pub expenditures: u64,
    pub invite_tokens: u64,
    pub sessions: u64,
    pub profile_images: u64,
    /// Evaluation rows kept under a tombstone instructor.
    pub evaluations_tombstoned: u64,
}

/// Result of a batch evaluation upsert.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct UpsertSummary {
    pub inserted: u64,
    pub replaced: u64,
}
