use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::course::{MAX_YEAR, MIN_YEAR};
use super::ids::{ItemId, UserId};
use crate::error::FieldError;

/// Non-negative currency amount in integer cents.
///
/// Serialized as a decimal string with exactly two fraction digits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cents(pub u64);

impl Cents {
    /// Largest amount the store can hold (it keeps cents in a signed 64-bit column).
    pub const MAX: Cents = Cents(i64::MAX as u64);

    pub fn checked_add(self, other: Cents) -> Option<Cents> {
        self.0.checked_add(other.0).filter(|&c| c <= Self::MAX.0).map(Cents)
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

/// Parses a plain decimal such as `125000.50`, `125000.5` or `125000`.
/// At most two fraction digits; no sign, separators or exponent.
impl FromStr for Cents {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('-') {
            return Err("amount must be non-negative".into());
        }
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        let digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        if whole.is_empty() || !digits(whole) || !digits(frac) {
            return Err(format!("`{s}` is not a decimal amount"));
        }
        if frac.len() > 2 {
            return Err("amount has more than two fraction digits".into());
        }
        let overflow = || "amount is too large".to_string();
        let whole: u64 = whole.parse().map_err(|_| overflow())?;
        let frac: u64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<u64>().unwrap() * 10,
            _ => frac.parse().unwrap(),
        };
        let cents = whole
            .checked_mul(100)
            .and_then(|c| c.checked_add(frac))
            .filter(|&c| c <= Cents::MAX.0)
            .ok_or_else(overflow)?;
        Ok(Cents(cents))
    }
}

impl Serialize for Cents {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cents {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResearchKind {
    Grant,
    Publication,
    Expenditure,
}

impl ResearchKind {
    pub const ALL: [ResearchKind; 3] = [
        ResearchKind::Grant,
        ResearchKind::Publication,
        ResearchKind::Expenditure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResearchKind::Grant => "grant",
            ResearchKind::Publication => "publication",
            ResearchKind::Expenditure => "expenditure",
        }
    }
}

impl fmt::Display for ResearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResearchDetails {
    Grant {
        title: String,
        funding_agency: String,
        amount: Cents,
        start_date: NaiveDate,
        end_date: NaiveDate,
    },
    Publication {
        title: String,
        venue: String,
        publication_year: i32,
        author_list: String,
    },
    Expenditure {
        description: String,
        amount: Cents,
        fiscal_year: i32,
    },
}

/// A grant, publication or expenditure reported by its owner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchItem {
    pub item_id: ItemId,
    pub owner_id: UserId,
    #[serde(flatten)]
    pub details: ResearchDetails,
}

impl ResearchItem {
    pub fn new(owner_id: UserId, details: ResearchDetails) -> Self {
        Self {
            item_id: ItemId::new(),
            owner_id,
            details,
        }
    }

    pub fn kind(&self) -> ResearchKind {
        match self.details {
            ResearchDetails::Grant { .. } => ResearchKind::Grant,
            ResearchDetails::Publication { .. } => ResearchKind::Publication,
            ResearchDetails::Expenditure { .. } => ResearchKind::Expenditure,
        }
    }

    /// Title for grants and publications, description for expenditures.
    pub fn headline(&self) -> &str {
        match &self.details {
            ResearchDetails::Grant { title, .. } | ResearchDetails::Publication { title, .. } => {
                title
            }
            ResearchDetails::Expenditure { description, .. } => description,
        }
    }

    /// The calendar year the item is attributed to.
    pub fn year(&self) -> i32 {
        match &self.details {
            ResearchDetails::Grant { start_date, .. } => start_date.year(),
            ResearchDetails::Publication {
                publication_year, ..
            } => *publication_year,
            ResearchDetails::Expenditure { fiscal_year, .. } => *fiscal_year,
        }
    }

    pub fn amount(&self) -> Option<Cents> {
        match &self.details {
            ResearchDetails::Grant { amount, .. } | ResearchDetails::Expenditure { amount, .. } => {
                Some(*amount)
            }
            ResearchDetails::Publication { .. } => None,
        }
    }

    /// Newest-first sort key. Compared as text, so dates are zero padded.
    pub(crate) fn recency_key(&self) -> String {
        match &self.details {
            ResearchDetails::Grant { start_date, .. } => start_date.format("%Y-%m-%d").to_string(),
            ResearchDetails::Publication {
                publication_year, ..
            } => format!("{publication_year:04}"),
            ResearchDetails::Expenditure { fiscal_year, .. } => format!("{fiscal_year:04}"),
        }
    }

    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errors = Vec::new();
        let year_ok = |y: i32| (MIN_YEAR..=MAX_YEAR).contains(&y);
        match &self.details {
            ResearchDetails::Grant {
                title,
                funding_agency,
                amount,
                start_date,
                end_date,
            } => {
                if title.trim().is_empty() {
                    errors.push(FieldError::new("title", "title is required"));
                }
                if funding_agency.trim().is_empty() {
                    errors.push(FieldError::new("funding_agency", "funding agency is required"));
                }
                if *amount > Cents::MAX {
                    errors.push(FieldError::new("amount", "amount is too large"));
                }
                if end_date < start_date {
                    errors.push(FieldError::new("end_date", "end date is before start date"));
                }
            }
            ResearchDetails::Publication {
                title,
                publication_year,
                ..
            } => {
                if title.trim().is_empty() {
                    errors.push(FieldError::new("title", "title is required"));
                }
                if !year_ok(*publication_year) {
                    errors.push(FieldError::new(
                        "publication_year",
                        format!("year outside [{MIN_YEAR}, {MAX_YEAR}]"),
                    ));
                }
            }
            ResearchDetails::Expenditure {
                description,
                amount,
                fiscal_year,
            } => {
                if description.trim().is_empty() {
                    errors.push(FieldError::new("description", "description is required"));
                }
                if *amount > Cents::MAX {
                    errors.push(FieldError::new("amount", "amount is too large"));
                }
                if !year_ok(*fiscal_year) {
                    errors.push(FieldError::new(
                        "fiscal_year",
                        format!("year outside [{MIN_YEAR}, {MAX_YEAR}]"),
                    ));
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}
