//! Canonical evaluation sheet parsing for `.xlsx` and `.csv` payloads.

use std::collections::{HashMap, HashSet};
use std::io::Cursor;

use calamine::{Data, Reader, Xlsx};
use serde::Serialize;

use crate::domain::{
    normalize_email, CourseKey, EvaluationRecord, InstructorRef, QuestionCategory, Term, UserId,
    MAX_YEAR, MIN_YEAR,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkbookFormat {
    Xlsx,
    Csv,
}

impl WorkbookFormat {
    /// Guesses from a file name's extension.
    pub fn from_file_name(name: &str) -> Option<Self> {
        let ext = name.rsplit_once('.')?.1.to_ascii_lowercase();
        match ext.as_str() {
            "xlsx" => Some(WorkbookFormat::Xlsx),
            "csv" => Some(WorkbookFormat::Csv),
            _ => None,
        }
    }
}

/// Canonical column names, in the order row errors are checked.
pub const COLUMNS: [&str; 15] = [
    "instructor_email",
    "course_prefix",
    "course_number",
    "section",
    "term",
    "year",
    "question_id",
    "question_text",
    "question_category",
    "n1",
    "n2",
    "n3",
    "n4",
    "n5",
    "enrollment",
];

/// Columns that may be absent from the header entirely.
const OPTIONAL_COLUMNS: [&str; 1] = ["enrollment"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based, counting data rows after the header.
    pub row_number: usize,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseTotals {
    pub rows_read: usize,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub accepted: Vec<EvaluationRecord>,
    pub rejected: Vec<RowError>,
    pub totals: ParseTotals,
}

struct Table {
    header: Vec<String>,
    /// (row number, cells)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_csv(payload: &[u8]) -> Result<Table> {
    let text = std::str::from_utf8(payload)
        .map_err(|e| Error::UnreadablePayload(format!("CSV is not valid UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r
            .map_err(|e| Error::UnreadablePayload(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect(),
        None => return Err(Error::UnreadablePayload("CSV has no rows".into())),
    };
    let mut rows = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record.map_err(|e| Error::UnreadablePayload(e.to_string()))?;
        rows.push((i + 1, record.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn cell_text(cell: &Data) -> String {
    match cell {
        Data::Empty => String::new(),
        Data::String(s) => s.clone(),
        // Integral floats come from numeric cells; render them without ".0".
        Data::Float(f) if f.fract() == 0.0 && f.abs() < 1e15 => format!("{}", *f as i64),
        Data::Float(f) => f.to_string(),
        Data::Int(i) => i.to_string(),
        other => other.to_string(),
    }
}

fn read_xlsx(payload: &[u8]) -> Result<Table> {
    let mut workbook: Xlsx<_> = Xlsx::new(Cursor::new(payload))
        .map_err(|e| Error::UnreadablePayload(format!("not an xlsx workbook: {e}")))?;
    let range = workbook
        .worksheet_range_at(0)
        .ok_or_else(|| Error::UnreadablePayload("workbook has no worksheets".into()))?
        .map_err(|e| Error::UnreadablePayload(e.to_string()))?;
    let mut rows = range.rows();
    let header = rows
        .next()
        .map(|r| r.iter().map(cell_text).collect())
        .unwrap_or_default();
    let rows = rows
        .enumerate()
        .map(|(i, r)| (i + 1, r.iter().map(cell_text).collect()))
        .collect();
    Ok(Table { header, rows })
}

fn column_index(header: &[String]) -> Result<HashMap<&'static str, usize>> {
    let mut index = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        let name = name.trim().to_ascii_lowercase();
        if let Some(&canonical) = COLUMNS.iter().find(|&&c| c == name) {
            index.entry(canonical).or_insert(i);
        }
    }
    let missing: Vec<String> = COLUMNS
        .iter()
        .filter(|c| !index.contains_key(*c) && !OPTIONAL_COLUMNS.contains(c))
        .map(|c| c.to_string())
        .collect();
    if missing.is_empty() {
        Ok(index)
    } else {
        Err(Error::MissingHeader(missing))
    }
}

struct RowReader<'a> {
    cells: &'a [String],
    index: &'a HashMap<&'static str, usize>,
}

type FieldResult<T> = std::result::Result<T, (&'static str, String)>;

impl RowReader<'_> {
    fn get(&self, col: &'static str) -> &str {
        self.index
            .get(col)
            .and_then(|&i| self.cells.get(i))
            .map(|s| s.trim())
            .unwrap_or("")
    }

    fn required(&self, col: &'static str) -> FieldResult<&str> {
        match self.get(col) {
            "" => Err((col, format!("{col} is required"))),
            v => Ok(v),
        }
    }

    fn count(&self, col: &'static str) -> FieldResult<u32> {
        let raw = self.required(col)?;
        parse_count(raw).ok_or_else(|| (col, format!("`{raw}` is not a non-negative integer")))
    }
}

fn parse_count(raw: &str) -> Option<u32> {
    let digits = raw.strip_suffix(".0").unwrap_or(raw);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn parse_row(
    row: &RowReader<'_>,
    resolve: &dyn Fn(&str) -> Option<UserId>,
) -> FieldResult<EvaluationRecord> {
    let email = normalize_email(row.required("instructor_email")?);
    let instructor = resolve(&email).ok_or_else(|| {
        (
            "instructor_email",
            format!("no instructor with email `{email}` in this department"),
        )
    })?;
    let prefix = crate::domain::course::normalize_prefix(row.required("course_prefix")?)
        .map_err(|m| ("course_prefix", m))?;
    let number = row.required("course_number")?.to_string();
    let section = row.required("section")?.to_string();
    let term: Term = row.required("term")?.parse().map_err(|m| ("term", m))?;
    let year_raw = row.required("year")?;
    let year = parse_count(year_raw)
        .and_then(|y| i32::try_from(y).ok())
        .filter(|y| (MIN_YEAR..=MAX_YEAR).contains(y))
        .ok_or_else(|| ("year", format!("`{year_raw}` is not a year in [{MIN_YEAR}, {MAX_YEAR}]")))?;
    let question_id = row.required("question_id")?.to_string();
    let question_text = row.get("question_text").to_string();
    let question_category: QuestionCategory = row
        .required("question_category")?
        .parse()
        .map_err(|m| ("question_category", m))?;
    let responses = [
        row.count("n1")?,
        row.count("n2")?,
        row.count("n3")?,
        row.count("n4")?,
        row.count("n5")?,
    ];
    let enrollment = match row.get("enrollment") {
        "" => None,
        raw => Some(
            parse_count(raw)
                .ok_or_else(|| ("enrollment", format!("`{raw}` is not a non-negative integer")))?,
        ),
    };
    let record = EvaluationRecord {
        instructor: InstructorRef::User(instructor),
        course_key: CourseKey {
            prefix,
            number,
            section,
            term,
            year,
        },
        question_id,
        question_text,
        question_category,
        responses,
        enrollment,
    };
    if let Err(errors) = record.validate() {
        let first = &errors[0];
        let field = COLUMNS
            .iter()
            .find(|&&c| c == first.field)
            .copied()
            .unwrap_or("row");
        return Err((field, first.message.clone()));
    }
    Ok(record)
}

/// Parses a chair-uploaded evaluation sheet.
///
/// Every non-blank data row ends up either accepted or rejected with the
/// first offending field. `resolve` maps a lowercase instructor email to a
/// user; unknown emails reject the row. Duplicate keys within one payload
/// reject the later row.
pub fn parse_eval_workbook(
    payload: &[u8],
    format: WorkbookFormat,
    resolve: &dyn Fn(&str) -> Option<UserId>,
) -> Result<ParseReport> {
    if payload.is_empty() {
        return Err(Error::UnreadablePayload("payload is empty".into()));
    }
    let table = match format {
        WorkbookFormat::Csv => read_csv(payload)?,
        WorkbookFormat::Xlsx => read_xlsx(payload)?,
    };
    let index = column_index(&table.header)?;

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut seen: HashMap<(UserId, CourseKey, String), usize> = HashMap::new();
    let mut rows_read = 0;
    for (row_number, cells) in &table.rows {
        if cells.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        rows_read += 1;
        let reader = RowReader {
            cells,
            index: &index,
        };
        match parse_row(&reader, resolve) {
            Ok(record) => {
                let key = (
                    record.instructor.user().expect("parsed rows name a user"),
                    record.course_key.clone(),
                    record.question_id.clone(),
                );
                if let Some(first) = seen.get(&key) {
                    rejected.push(RowError {
                        row_number: *row_number,
                        field: "question_id".into(),
                        message: format!("duplicates the key of row {first}"),
                    });
                } else {
                    seen.insert(key, *row_number);
                    accepted.push(record);
                }
            }
            Err((field, message)) => rejected.push(RowError {
                row_number: *row_number,
                field: field.to_string(),
                message,
            }),
        }
    }
    let totals = ParseTotals {
        rows_read,
        accepted: accepted.len(),
        rejected: rejected.len(),
    };
    Ok(ParseReport {
        accepted,
        rejected,
        totals,
    })
}

/// Writes records back out as a canonical CSV sheet.
pub fn write_canonical_csv<'a>(
    rows: impl IntoIterator<Item = (&'a str, &'a EvaluationRecord)>,
) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("in-memory write");
    for (email, r) in rows {
        let k = &r.course_key;
        let mut fields = vec![
            email.to_string(),
            k.prefix.clone(),
            k.number.clone(),
            k.section.clone(),
            k.term.to_string(),
            k.year.to_string(),
            r.question_id.clone(),
            r.question_text.clone(),
            r.question_category.to_string(),
        ];
        fields.extend(r.responses.iter().map(u32::to_string));
        fields.push(r.enrollment.map(|e| e.to_string()).unwrap_or_default());
        writer.write_record(&fields).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

/// Distinct instructors named in accepted rows.
pub(crate) fn instructors(report: &ParseReport) -> HashSet<UserId> {
    report
        .accepted
        .iter()
        .filter_map(|r| r.instructor.user())
        .collect()
}
