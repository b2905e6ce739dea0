use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::course::CourseKey;
use super::ids::{TombstoneId, UserId};
use crate::error::FieldError;

/// Who taught a section. Deleted accounts leave a tombstone behind so that
/// institutional evaluation rows survive without pointing at a person.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstructorRef {
    User(UserId),
    Tombstone(TombstoneId),
}

impl InstructorRef {
    pub fn user(&self) -> Option<UserId> {
        match self {
            InstructorRef::User(id) => Some(*id),
            InstructorRef::Tombstone(_) => None,
        }
    }

    /// Stable text form used as the store's uniqueness key.
    pub(crate) fn storage_key(&self) -> String {
        match self {
            InstructorRef::User(id) => format!("u:{id}"),
            InstructorRef::Tombstone(id) => format!("t:{id}"),
        }
    }

    pub(crate) fn from_storage_key(s: &str) -> Option<Self> {
        let (tag, id) = s.split_once(':')?;
        match tag {
            "u" => id.parse().ok().map(InstructorRef::User),
            "t" => id.parse().ok().map(InstructorRef::Tombstone),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionCategory {
    Course,
    Instructor,
    Other,
}

impl QuestionCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionCategory::Course => "course",
            QuestionCategory::Instructor => "instructor",
            QuestionCategory::Other => "other",
        }
    }
}

impl fmt::Display for QuestionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "course" => Ok(QuestionCategory::Course),
            "instructor" => Ok(QuestionCategory::Instructor),
            "other" => Ok(QuestionCategory::Other),
            other => Err(format!(
                "unknown question category `{other}` (expected course, instructor or other)"
            )),
        }
    }
}

/// One question's response histogram for one section instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub instructor: InstructorRef,
    pub course_key: CourseKey,
    pub question_id: String,
    pub question_text: String,
    pub question_category: QuestionCategory,
    /// Counts for ratings 1 through 5.
    pub responses: [u32; 5],
    pub enrollment: Option<u32>,
}

impl EvaluationRecord {
    pub fn respondents(&self) -> u64 {
        self.responses.iter().map(|&n| u64::from(n)).sum()
    }

    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errors = self.course_key.validate();
        if self.question_id.trim().is_empty() {
            errors.push(FieldError::new("question_id", "question id is empty"));
        }
        if let Some(enrollment) = self.enrollment {
            let respondents = self.respondents();
            if respondents > u64::from(enrollment) {
                errors.push(FieldError::new(
                    "enrollment",
                    format!("{respondents} responses exceed enrollment of {enrollment}"),
                ));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// The store's uniqueness key: (instructor, section instance, question).
    pub fn key(&self) -> (InstructorRef, &CourseKey, &str) {
        (self.instructor, &self.course_key, &self.question_id)
    }
}
