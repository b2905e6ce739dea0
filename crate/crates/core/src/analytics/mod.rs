//! Aggregation, percentiles, distributions and the read-side views built on them.

mod stats;

use std::collections::BTreeSet;

use chrono::Datelike;
use serde::Serialize;

pub use stats::{
    all_section_averages, group_sections, histogram_stats, kde_bandwidth, kde_curve,
    mean_of_sections, percentile_rank, question_stats, round_to, section_averages,
    DistributionCurve, GaussianKde, Highlight, Metric, QuestionStats, SectionAverages,
    GRID_POINTS,
};

use crate::authz::{Action, Principal};
use crate::domain::{
    Cents, CourseCode, EvaluationRecord, InstructorRef, QuestionCategory, ResearchKind,
    Role, Scope, TermWindow, UserAccount, UserId,
};
use crate::error::{Error, Result};
use crate::platform::Platform;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuestionDetail {
    pub question_text: String,
    pub question_category: QuestionCategory,
    pub enrollment: Option<u32>,
    #[serde(flatten)]
    pub stats: QuestionStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionDetail {
    pub averages: SectionAverages,
    pub questions: Vec<QuestionDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CourseAnalytics {
    pub course: CourseCode,
    pub window: TermWindow,
    pub metric: Metric,
    /// The subject's own sections of the course in the window.
    pub sections: Vec<SectionAverages>,
    pub subject_average: Option<f64>,
    pub curve: DistributionCurve,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ResearchTotals {
    pub grant_count: u64,
    pub grant_total_cents: Cents,
    pub publication_count: u64,
    pub expenditure_count: u64,
    pub expenditure_total_cents: Cents,
}

fn add_cents(a: Cents, b: Cents) -> Cents {
    a.checked_add(b).unwrap_or(Cents::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberRef {
    pub user_id: UserId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeachingSummary {
    pub courses_taught: usize,
    pub overall_avg_instructor_rating: Option<f64>,
    pub percentile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamSummaryRow {
    pub member: MemberRef,
    pub teaching: TeachingSummary,
    pub research: ResearchTotals,
}

#[derive(Debug, Clone, Default)]
pub struct TeamFilters {
    pub name_query: Option<String>,
    pub course_query: Option<String>,
}

fn contains_ci(haystack: &str, needle: &str) -> bool {
    haystack.to_lowercase().contains(&needle.to_lowercase())
}

fn course_matches(course: &CourseCode, query: &str) -> bool {
    let q = query.trim();
    [
        course.to_string(),
        format!("{} {}", course.prefix, course.number),
        format!("{}{}", course.prefix, course.number),
    ]
    .iter()
    .any(|form| contains_ci(form, q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DashboardSummary {
    pub recent_evals: Vec<SectionAverages>,
    pub research_year: i32,
    pub research_totals: ResearchTotals,
    pub pending_actions: u64,
}

pub const DASHBOARD_RECENT_EVALS: usize = 4;

impl Platform {
    fn research_totals(&self, owner: UserId, window: &TermWindow) -> Result<ResearchTotals> {
        let scope = Scope::owner(owner).with_window(*window);
        let mut totals = ResearchTotals::default();
        for item in self.store.research_items(ResearchKind::Grant, &scope)? {
            totals.grant_count += 1;
            totals.grant_total_cents = add_cents(totals.grant_total_cents, item.amount().unwrap_or_default());
        }
        totals.publication_count = self
            .store
            .research_items(ResearchKind::Publication, &scope)?
            .len() as u64;
        for item in self.store.research_items(ResearchKind::Expenditure, &scope)? {
            totals.expenditure_count += 1;
            totals.expenditure_total_cents =
                add_cents(totals.expenditure_total_cents, item.amount().unwrap_or_default());
        }
        Ok(totals)
    }

    /// Section averages of `subject` (the caller when absent), newest first.
    pub fn evaluation_sections(
        &self,
        caller: &Principal,
        subject: Option<UserId>,
        window: &TermWindow,
    ) -> Result<Vec<SectionAverages>> {
        self.require(caller, Action::ViewEvaluations, subject)?;
        let records = self
            .store
            .evaluations_by_instructor(subject.unwrap_or(caller.user_id), window)?;
        Ok(all_section_averages(&records))
    }

    /// Per-question breakdown of every instance of one section in the window.
    pub fn section_details(
        &self,
        caller: &Principal,
        subject: Option<UserId>,
        course: &CourseCode,
        section: &str,
        window: &TermWindow,
    ) -> Result<Vec<SectionDetail>> {
        self.require(caller, Action::ViewEvaluationDetails, subject)?;
        let records: Vec<EvaluationRecord> = self
            .store
            .evaluations_by_instructor(subject.unwrap_or(caller.user_id), window)?
            .into_iter()
            .filter(|r| r.course_key.course() == *course && r.course_key.section == section)
            .collect();
        group_sections(&records)
            .into_iter()
            .map(|mut group| {
                let averages = section_averages(&group)?;
                group.sort_by(|a, b| a.question_id.cmp(&b.question_id));
                let questions = group
                    .into_iter()
                    .map(|r| QuestionDetail {
                        stats: question_stats(&r),
                        question_text: r.question_text,
                        question_category: r.question_category,
                        enrollment: r.enrollment,
                    })
                    .collect();
                Ok(SectionDetail {
                    averages,
                    questions,
                })
            })
            .collect()
    }

    /// Mean of the subject's per-section averages for one course.
    pub fn subject_course_average(
        &self,
        subject: UserId,
        course: &CourseCode,
        window: &TermWindow,
        metric: Metric,
    ) -> Result<Option<f64>> {
        let records: Vec<EvaluationRecord> = self
            .store
            .evaluations_by_instructor(subject, window)?
            .into_iter()
            .filter(|r| r.course_key.course() == *course)
            .collect();
        Ok(mean_of_sections(&all_section_averages(&records), metric))
    }

    /// The anonymized peer distribution for one course.
    ///
    /// Faculty always see themselves as the subject; only the subject's own
    /// values are identified in the result.
    pub fn course_distribution(
        &self,
        caller: &Principal,
        course: &CourseCode,
        window: &TermWindow,
        metric: Metric,
        subject: Option<UserId>,
    ) -> Result<CourseAnalytics> {
        self.require(caller, Action::ViewCourseAnalytics, subject)?;
        let subject = subject.unwrap_or(caller.user_id);
        let sections = all_section_averages(&self.store.evaluations_for_course(course, window)?);

        let mut instructors: Vec<InstructorRef> = Vec::new();
        for s in &sections {
            if !instructors.contains(&s.instructor) {
                instructors.push(s.instructor);
            }
        }
        let samples: Vec<f64> = instructors
            .iter()
            .filter_map(|i| mean_of_sections(sections.iter().filter(|s| s.instructor == *i), metric))
            .collect();
        let min = self.settings.cohort_min;
        if samples.len() < min {
            return Err(Error::InsufficientCohort {
                n: samples.len(),
                min,
            });
        }
        let own: Vec<SectionAverages> = sections
            .into_iter()
            .filter(|s| s.instructor == InstructorRef::User(subject))
            .collect();
        let subject_average = mean_of_sections(&own, metric);
        let curve = kde_curve(&samples, subject_average)?;
        Ok(CourseAnalytics {
            course: course.clone(),
            window: *window,
            metric,
            sections: own,
            subject_average,
            curve,
        })
    }

    /// One row per department member matching `filters`. Percentiles are
    /// computed over every rated member, before filtering.
    pub fn team_summary(
        &self,
        caller: &Principal,
        window: &TermWindow,
        filters: &TeamFilters,
    ) -> Result<Vec<TeamSummaryRow>> {
        self.require(caller, Action::ViewTeam, None)?;
        let members = self.store.department_users(&caller.department_id)?;

        struct Teaching {
            courses: BTreeSet<CourseCode>,
            overall: Option<f64>,
        }
        let teaching: Vec<Teaching> = members
            .iter()
            .map(|m| {
                let sections =
                    all_section_averages(&self.store.evaluations_by_instructor(m.user_id, window)?);
                Ok(Teaching {
                    courses: sections.iter().map(|s| s.course_key.course()).collect(),
                    overall: mean_of_sections(&sections, Metric::Instructor),
                })
            })
            .collect::<Result<_>>()?;
        let population: Vec<f64> = teaching.iter().filter_map(|t| t.overall).collect();

        let name_matches = |m: &UserAccount| {
            filters
                .name_query
                .as_deref()
                .is_none_or(|q| contains_ci(&m.full_name(), q.trim()))
        };
        let mut rows = Vec::new();
        for (member, t) in members.iter().zip(&teaching) {
            let course_ok = filters
                .course_query
                .as_deref()
                .filter(|q| !q.trim().is_empty())
                .is_none_or(|q| t.courses.iter().any(|c| course_matches(c, q)));
            if !name_matches(member) || !course_ok {
                continue;
            }
            let percentile = match t.overall {
                Some(v) => Some(percentile_rank(v, &population)?),
                None => None,
            };
            rows.push(TeamSummaryRow {
                member: MemberRef {
                    user_id: member.user_id,
                    name: member.full_name(),
                },
                teaching: TeachingSummary {
                    courses_taught: t.courses.len(),
                    overall_avg_instructor_rating: t.overall,
                    percentile,
                },
                research: self.research_totals(member.user_id, window)?,
            });
        }
        Ok(rows)
    }

    /// The caller's own at-a-glance preview.
    pub fn dashboard_summary(&self, caller: &Principal) -> Result<DashboardSummary> {
        self.require(caller, Action::ViewDashboard, None)?;
        let mut recent_evals = all_section_averages(
            &self
                .store
                .evaluations_by_instructor(caller.user_id, &TermWindow::all_time())?,
        );
        recent_evals.truncate(DASHBOARD_RECENT_EVALS);
        let year = self.clock.now().year();
        let research_totals =
            self.research_totals(caller.user_id, &TermWindow::years(year, year).map_err(Error::Schema)?)?;
        let pending_actions = match caller.role {
            Role::Chair => self.store.pending_accounts(&caller.department_id)?,
            Role::Faculty => 0,
        };
        Ok(DashboardSummary {
            recent_evals,
            research_year: year,
            research_totals,
            pending_actions,
        })
    }
}

