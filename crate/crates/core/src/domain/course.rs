use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

pub const MIN_YEAR: i32 = 1900;
pub const MAX_YEAR: i32 = 2200;

/// Academic term. Declaration order is calendar order within a year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Spring,
    Summer,
    Fall,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::Spring, Term::Summer, Term::Fall];

    pub fn as_str(self) -> &'static str {
        match self {
            Term::Spring => "Spring",
            Term::Summer => "Summer",
            Term::Fall => "Fall",
        }
    }

    pub(crate) fn ordinal(self) -> i64 {
        self as i64
    }

    pub(crate) fn from_ordinal(n: i64) -> Option<Term> {
        Term::ALL.get(usize::try_from(n).ok()?).copied()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Term {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Term::ALL
            .into_iter()
            .find(|term| term.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| format!("unknown term `{t}` (expected Spring, Summer or Fall)"))
    }
}

/// A (year, term) point, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermYear {
    pub year: i32,
    pub term: Term,
}

impl TermYear {
    pub fn new(year: i32, term: Term) -> Self {
        Self { year, term }
    }
}

impl fmt::Display for TermYear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.year, self.term)
    }
}

fn parse_year(s: &str) -> Result<i32, String> {
    let year: i32 = s
        .trim()
        .parse()
        .map_err(|_| format!("invalid year `{}`", s.trim()))?;
    if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
        return Err(format!("year {year} outside [{MIN_YEAR}, {MAX_YEAR}]"));
    }
    Ok(year)
}

/// Inclusive range of terms. Never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermWindow {
    pub from: TermYear,
    pub to: TermYear,
}

impl TermWindow {
    pub fn new(from: TermYear, to: TermYear) -> Result<Self, String> {
        if from > to {
            return Err(format!("window {from}..{to} is empty"));
        }
        Ok(Self { from, to })
    }

    /// Every term of every representable year.
    pub fn all_time() -> Self {
        Self {
            from: TermYear::new(MIN_YEAR, Term::Spring),
            to: TermYear::new(MAX_YEAR, Term::Fall),
        }
    }

    pub fn years(first: i32, last: i32) -> Result<Self, String> {
        Self::new(TermYear::new(first, Term::Spring), TermYear::new(last, Term::Fall))
    }

    pub fn contains(&self, point: TermYear) -> bool {
        self.from <= point && point <= self.to
    }

    pub fn contains_year(&self, year: i32) -> bool {
        self.from.year <= year && year <= self.to.year
    }

    fn parse_bound(s: &str, upper: bool) -> Result<TermYear, String> {
        match s.split_once('-') {
            Some((year, term)) => Ok(TermYear::new(parse_year(year)?, term.parse()?)),
            None => {
                let year = parse_year(s)?;
                let term = if upper { Term::Fall } else { Term::Spring };
                Ok(TermYear::new(year, term))
            }
        }
    }
}

impl fmt::Display for TermWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.from, self.to)
    }
}

/// Accepts `2023-Fall..2024-Spring`, `2024-Spring`, `2024` and `2022..2024`.
/// Term names are case-insensitive.
impl FromStr for TermWindow {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (lo, hi) = s.split_once("..").unwrap_or((s, s));
        TermWindow::new(Self::parse_bound(lo, false)?, Self::parse_bound(hi, true)?)
    }
}

/// A course independent of any particular offering, e.g. `CSCE 145`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CourseCode {
    pub prefix: String,
    pub number: String,
}

impl CourseCode {
    pub fn new(prefix: &str, number: &str) -> Result<Self, String> {
        let prefix = normalize_prefix(prefix)?;
        let number = number.trim();
        if number.is_empty() {
            return Err("course number is empty".into());
        }
        Ok(Self {
            prefix,
            number: number.to_string(),
        })
    }
}

impl fmt::Display for CourseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.prefix, self.number)
    }
}

/// Accepts `CSCE-145`, `CSCE 145` and `CSCE145`.
impl FromStr for CourseCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .find(|c: char| !c.is_ascii_alphabetic())
            .ok_or_else(|| format!("course `{s}` has no number"))?;
        let (prefix, rest) = s.split_at(split);
        let number = rest.trim_start_matches(['-', ' ']);
        CourseCode::new(prefix, number)
    }
}

pub(crate) fn normalize_prefix(prefix: &str) -> Result<String, String> {
    let p = prefix.trim().to_ascii_uppercase();
    if p.is_empty() || !p.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(format!("course prefix `{}` must be alphabetic", prefix.trim()));
    }
    Ok(p)
}

/// Identifies one section instance: a course offered in a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CourseKey {
    pub prefix: String,
    pub number: String,
    pub section: String,
    pub term: Term,
    pub year: i32,
}

impl CourseKey {
    pub fn course(&self) -> CourseCode {
        CourseCode {
            prefix: self.prefix.clone(),
            number: self.number.clone(),
        }
    }

    pub fn term_year(&self) -> TermYear {
        TermYear::new(self.year, self.term)
    }

    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if let Err(e) = normalize_prefix(&self.prefix) {
            errors.push(FieldError::new("course_prefix", e));
        } else if self.prefix != self.prefix.to_ascii_uppercase() {
            errors.push(FieldError::new("course_prefix", "course prefix must be uppercase"));
        }
        if self.number.trim().is_empty() {
            errors.push(FieldError::new("course_number", "course number is empty"));
        }
        if self.section.trim().is_empty() {
            errors.push(FieldError::new("section", "section is empty"));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            errors.push(FieldError::new(
                "year",
                format!("year {} outside [{MIN_YEAR}, {MAX_YEAR}]", self.year),
            ));
        }
        errors
    }
}
