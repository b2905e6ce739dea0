//! The chair/faculty authorization matrix.

use serde::Serialize;

use crate::domain::{DepartmentId, Role, UserId};

/// Every action a handler may ask about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    ViewDashboard,
    ManageOwnAccount,
    ViewEvaluations,
    ViewEvaluationDetails,
    ViewCourseAnalytics,
    ViewResearch,
    ReportResearch,
    ViewTeam,
    UploadEvaluations,
    ManageUsers,
}

impl Action {
    pub const ALL: [Action; 10] = [
        Action::ViewDashboard,
        Action::ManageOwnAccount,
        Action::ViewEvaluations,
        Action::ViewEvaluationDetails,
        Action::ViewCourseAnalytics,
        Action::ViewResearch,
        Action::ReportResearch,
        Action::ViewTeam,
        Action::UploadEvaluations,
        Action::ManageUsers,
    ];

    pub fn chair_only(self) -> bool {
        matches!(
            self,
            Action::ViewTeam | Action::UploadEvaluations | Action::ManageUsers
        )
    }

    /// Actions that only ever apply to the caller's own account.
    pub fn self_only(self) -> bool {
        matches!(
            self,
            Action::ViewDashboard | Action::ManageOwnAccount | Action::ReportResearch
        )
    }

    /// "Choose person" views: picking another subject is a chair privilege,
    /// so a faculty caller who tries gets `WrongRole` rather than `OutOfScope`.
    pub fn subject_choice_is_chair_privilege(self) -> bool {
        matches!(self, Action::ViewCourseAnalytics)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenialReason {
    Ok,
    NotAuthenticated,
    WrongRole,
    OutOfScope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AccessDecision {
    pub allowed: bool,
    pub reason: DenialReason,
}

impl AccessDecision {
    pub const OK: AccessDecision = AccessDecision {
        allowed: true,
        reason: DenialReason::Ok,
    };

    pub fn deny(reason: DenialReason) -> Self {
        debug_assert_ne!(reason, DenialReason::Ok);
        Self {
            allowed: false,
            reason,
        }
    }

    pub fn into_result(self) -> crate::Result<()> {
        use crate::Error;
        match self.reason {
            DenialReason::Ok => Ok(()),
            DenialReason::NotAuthenticated => Err(Error::NotAuthenticated),
            DenialReason::WrongRole => Err(Error::WrongRole),
            DenialReason::OutOfScope => Err(Error::OutOfScope),
        }
    }
}

/// Where the subject of a request sits relative to the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubjectScope {
    /// No subject given: the caller's own data.
    Absent,
    Caller,
    SameDepartment,
    /// Another department, or no such user.
    Outside,
}

impl SubjectScope {
    pub fn classify(
        caller: UserId,
        caller_department: &DepartmentId,
        subject: Option<(UserId, &DepartmentId)>,
    ) -> Self {
        match subject {
            None => SubjectScope::Absent,
            Some((id, _)) if id == caller => SubjectScope::Caller,
            Some((_, dept)) if dept == caller_department => SubjectScope::SameDepartment,
            Some(_) => SubjectScope::Outside,
        }
    }
}

/// The pure decision table.
pub fn decide(role: Option<Role>, action: Action, subject: SubjectScope) -> AccessDecision {
    let Some(role) = role else {
        return AccessDecision::deny(DenialReason::NotAuthenticated);
    };
    if action.chair_only() && role != Role::Chair {
        return AccessDecision::deny(DenialReason::WrongRole);
    }
    match subject {
        SubjectScope::Absent | SubjectScope::Caller => AccessDecision::OK,
        _ if action.self_only() => AccessDecision::deny(DenialReason::OutOfScope),
        _ if role == Role::Faculty && action.subject_choice_is_chair_privilege() => {
            AccessDecision::deny(DenialReason::WrongRole)
        }
        SubjectScope::SameDepartment if role == Role::Chair => AccessDecision::OK,
        SubjectScope::SameDepartment | SubjectScope::Outside => {
            AccessDecision::deny(DenialReason::OutOfScope)
        }
    }
}
