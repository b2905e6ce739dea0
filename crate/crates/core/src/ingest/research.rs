use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::domain::{Cents, ResearchDetails, ResearchItem, ResearchKind, UserId, MAX_YEAR, MIN_YEAR};
use crate::error::{Error, FieldError, Result};

/// Collects every field error instead of stopping at the first.
struct Form<'a> {
    fields: &'a BTreeMap<String, String>,
    errors: Vec<FieldError>,
}

impl<'a> Form<'a> {
    fn text(&self, name: &str) -> &'a str {
        self.fields.get(name).map(|s| s.trim()).unwrap_or("")
    }

    fn required(&mut self, name: &str) -> Option<&'a str> {
        match self.text(name) {
            "" => {
                self.errors.push(FieldError::new(name, format!("{name} is required")));
                None
            }
            v => Some(v),
        }
    }

    fn date(&mut self, name: &str) -> Option<NaiveDate> {
        let raw = self.required(name)?;
        match NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
            Ok(d) => Some(d),
            Err(_) => {
                self.errors.push(FieldError::new(
                    name,
                    format!("`{raw}` is not an ISO-8601 date (YYYY-MM-DD)"),
                ));
                None
            }
        }
    }

    fn amount(&mut self, name: &str) -> Option<Cents> {
        let raw = self.required(name)?;
        match raw.parse::<Cents>() {
            Ok(c) => Some(c),
            Err(msg) => {
                self.errors.push(FieldError::new(name, msg));
                None
            }
        }
    }

    fn year(&mut self, name: &str) -> Option<i32> {
        let raw = self.required(name)?;
        match raw.parse::<i32>() {
            Ok(y) if (MIN_YEAR..=MAX_YEAR).contains(&y) => Some(y),
            _ => {
                self.errors.push(FieldError::new(
                    name,
                    format!("`{raw}` is not a year in [{MIN_YEAR}, {MAX_YEAR}]"),
                ));
                None
            }
        }
    }
}

/// Turns a submitted form into a typed research item owned by `owner`.
pub fn validate_research_item(
    kind: ResearchKind,
    fields: &BTreeMap<String, String>,
    owner: UserId,
) -> Result<ResearchItem> {
    let mut form = Form {
        fields,
        errors: Vec::new(),
    };
    let details = match kind {
        ResearchKind::Grant => {
            let title = form.required("title");
            let agency = form.required("funding_agency");
            let amount = form.amount("amount");
            let start = form.date("start_date");
            let end = form.date("end_date");
            if let (Some(s), Some(e)) = (start, end) {
                if e < s {
                    form.errors
                        .push(FieldError::new("end_date", "end date is before start date"));
                }
            }
            match (title, agency, amount, start, end) {
                (Some(title), Some(agency), Some(amount), Some(start_date), Some(end_date)) => {
                    Some(ResearchDetails::Grant {
                        title: title.into(),
                        funding_agency: agency.into(),
                        amount,
                        start_date,
                        end_date,
                    })
                }
                _ => None,
            }
        }
        ResearchKind::Publication => {
            let title = form.required("title");
            let year = form.year("publication_year");
            match (title, year) {
                (Some(title), Some(publication_year)) => Some(ResearchDetails::Publication {
                    title: title.into(),
                    venue: form.text("venue").into(),
                    publication_year,
                    author_list: form.text("author_list").into(),
                }),
                _ => None,
            }
        }
        ResearchKind::Expenditure => {
            let description = form.required("description");
            let amount = form.amount("amount");
            let year = form.year("fiscal_year");
            match (description, amount, year) {
                (Some(description), Some(amount), Some(fiscal_year)) => {
                    Some(ResearchDetails::Expenditure {
                        description: description.into(),
                        amount,
                        fiscal_year,
                    })
                }
                _ => None,
            }
        }
    };
    match details {
        Some(details) if form.errors.is_empty() => {
            let item = ResearchItem::new(owner, details);
            item.validate().map_err(Error::FieldErrors)?;
            Ok(item)
        }
        _ => Err(Error::FieldErrors(form.errors)),
    }
}
