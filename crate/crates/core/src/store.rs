//! Transactional relational store.
//!
//! Backed by SQLite. A single connection sits behind a mutex, so every
//! public method is atomic with respect to every other; methods that touch
//! several rows run inside one transaction and roll back on any error.

use std::cmp::Reverse;
use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use rusqlite::{params, Connection, OptionalExtension, Row, Transaction};
use tracing::debug;

use crate::authz::Session;
use crate::domain::{
    Cents, CourseCode, CourseKey, Credential, DeletionReport, DepartmentId, EvaluationRecord,
    ImageRef, InstructorRef, InviteToken, ItemId, QuestionCategory, Record, RecordKind,
    ResearchDetails, ResearchItem, ResearchKind, Role, Scope, StoredId, Term, TermWindow,
    TombstoneId, UpsertSummary, UserAccount, UserId, UserProfile,
};
use crate::error::{Error, FieldError, Result};

const MIGRATIONS: &[&str] = &[include_str!("../migrations/0001_init.sql")];

pub struct Store {
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").finish_non_exhaustive()
    }
}

impl Store {
    /// Opens `sqlite::memory:`, `sqlite://<path>` or a bare file path and
    /// applies pending migrations.
    pub fn open(url: &str) -> Result<Self> {
        let conn = match url.trim() {
            "sqlite::memory:" | ":memory:" => Connection::open_in_memory()?,
            other => {
                let path = other
                    .strip_prefix("sqlite://")
                    .or_else(|| other.strip_prefix("sqlite:"))
                    .unwrap_or(other);
                Connection::open(Path::new(path))?
            }
        };
        Self::init(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(mut conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", true)?;
        conn.pragma_update(None, "journal_mode", "WAL").ok();
        migrate(&mut conn)?;
        Ok(Self {
            conn: Mutex::new(conn),
        })
    }

    fn conn(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn with_tx<T>(&self, f: impl FnOnce(&Transaction<'_>) -> Result<T>) -> Result<T> {
        let mut conn = self.conn();
        let tx = conn.transaction()?;
        let out = f(&tx)?;
        tx.commit()?;
        Ok(out)
    }

    // ---- generic record access -------------------------------------------

    /// Stores a record after checking its invariants. Evaluations upsert on
    /// their unique key; users and research items are always new rows.
    pub fn put_record(&self, record: &Record) -> Result<StoredId> {
        match record {
            Record::User(user) => {
                self.create_account(user, None)?;
                Ok(StoredId::User(user.user_id))
            }
            Record::Evaluation(eval) => {
                eval.validate().map_err(Error::InvariantViolation)?;
                self.with_tx(|tx| {
                    check_instructor_exists(tx, eval)?;
                    upsert_evaluation(tx, eval)?;
                    let id = tx.query_row(
                        "SELECT eval_id FROM evaluations WHERE instructor_key = ?1
                           AND course_prefix = ?2 AND course_number = ?3 AND section = ?4
                           AND term = ?5 AND year = ?6 AND question_id = ?7",
                        params![
                            eval.instructor.storage_key(),
                            eval.course_key.prefix,
                            eval.course_key.number,
                            eval.course_key.section,
                            eval.course_key.term.ordinal(),
                            eval.course_key.year,
                            eval.question_id,
                        ],
                        |r| r.get(0),
                    )?;
                    Ok(StoredId::Evaluation(id))
                })
            }
            Record::Research(item) => {
                self.insert_research_item(item)?;
                Ok(StoredId::Item(item.item_id))
            }
        }
    }

    /// Records matching `scope`, newest first with ties broken by stored id.
    pub fn query_records(&self, kind: RecordKind, scope: &Scope) -> Result<Vec<Record>> {
        match kind {
            RecordKind::User => {
                let mut users = Vec::new();
                for id in &scope.owners {
                    if let Some(u) = self.user(*id)? {
                        if scope.matches_text([
                            u.first_name.as_str(),
                            u.last_name.as_str(),
                            u.email.as_str(),
                        ]) {
                            users.push(u);
                        }
                    }
                }
                users.sort_by_key(|u| u.user_id);
                users.dedup_by_key(|u| u.user_id);
                Ok(users.into_iter().map(Record::User).collect())
            }
            RecordKind::Evaluation => {
                let window = scope.window.unwrap_or_else(TermWindow::all_time);
                let mut rows = Vec::new();
                {
                    let conn = self.conn();
                    for owner in &scope.owners {
                        rows.extend(select_evaluations(
                            &conn,
                            "WHERE instructor_id = ?1",
                            params![owner.to_string()],
                        )?);
                    }
                }
                rows.retain(|(_, e)| {
                    let code = e.course_key.course();
                    window.contains(e.course_key.term_year())
                        && scope.matches_text([
                            e.question_text.as_str(),
                            e.question_id.as_str(),
                            &format!("{} {}", code.prefix, code.number),
                            &code.to_string(),
                        ])
                });
                Ok(sort_evaluations(rows).into_iter().map(Record::Evaluation).collect())
            }
            RecordKind::Research(kind) => Ok(self
                .research_items(kind, scope)?
                .into_iter()
                .map(Record::Research)
                .collect()),
        }
    }

    // ---- users -----------------------------------------------------------

    /// Inserts a new account, optionally with its invite token, atomically.
    pub fn create_account(&self, user: &UserAccount, invite: Option<&InviteToken>) -> Result<()> {
        user.validate().map_err(Error::InvariantViolation)?;
        self.with_tx(|tx| {
            if email_taken(tx, &user.email, None)? {
                return Err(Error::DuplicateEmail);
            }
            tx.execute(
                "INSERT INTO users (user_id, email, first_name, last_name, role, department_id, password_hash)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
                params![
                    user.user_id.to_string(),
                    user.email,
                    user.first_name,
                    user.last_name,
                    user.role.as_str(),
                    user.department_id.as_str(),
                    password_hash(&user.credential),
                ],
            )?;
            if let Some(token) = invite {
                insert_invite(tx, token)?;
            }
            Ok(())
        })
    }

    pub fn user(&self, id: UserId) -> Result<Option<UserAccount>> {
        let conn = self.conn();
        select_user(&conn, "WHERE u.user_id = ?1", &id.to_string())
    }

    pub fn user_by_email(&self, email: &str) -> Result<Option<UserAccount>> {
        let conn = self.conn();
        select_user(&conn, "WHERE u.email = ?1", &crate::domain::normalize_email(email))
    }

    /// Members of a department ordered by last name, first name, id.
    pub fn department_users(&self, department: &DepartmentId) -> Result<Vec<UserAccount>> {
        let conn = self.conn();
        let mut stmt = conn.prepare(&format!(
            "{USER_SELECT} WHERE u.department_id = ?1 ORDER BY u.last_name, u.first_name, u.user_id"
        ))?;
        let users = stmt
            .query_map([department.as_str()], map_user)?
            .collect::<rusqlite::Result<Vec<_>>>()?;
        Ok(users)
    }

    pub fn update_profile(&self, id: UserId, profile: &UserProfile) -> Result<UserAccount> {
        let errors = profile.validate();
        if !errors.is_empty() {
            return Err(Error::InvariantViolation(errors));
        }
        let email = crate::domain::normalize_email(&profile.email);
        self.with_tx(|tx| {
            if select_user(tx, "WHERE u.user_id = ?1", &id.to_string())?.is_none() {
                return Err(Error::UnknownUser);
            }
            if email_taken(tx, &email, Some(id))? {
                return Err(Error::DuplicateEmail);
            }
            tx.execute(
                "UPDATE users SET email = ?2, first_name = ?3, last_name = ?4, role = ?5 WHERE user_id = ?1",
                params![
                    id.to_string(),
                    email,
                    profile.first_name.trim(),
                    profile.last_name.trim(),
                    profile.role.as_str(),
                ],
            )?;
            select_user(tx, "WHERE u.user_id = ?1", &id.to_string())?.ok_or(Error::UnknownUser)
        })
    }

    /// Replaces the password hash only if the stored one is still `expected`.
    /// Returns whether the swap happened.
    pub fn swap_password(&self, id: UserId, expected: &str, new_hash: &str) -> Result<bool> {
        let conn = self.conn();
        let n = conn.execute(
            "UPDATE users SET password_hash = ?3 WHERE user_id = ?1 AND password_hash = ?2",
            params![id.to_string(), expected, new_hash],
        )?;
        Ok(n == 1)
    }

    pub fn set_profile_image(&self, id: UserId, content_type: &str, bytes: &[u8]) -> Result<()> {
        let conn = self.conn();
        conn.execute(
            "INSERT INTO profile_images (user_id, content_type, bytes) VALUES (?1, ?2, ?3)
             ON CONFLICT (user_id) DO UPDATE SET content_type = excluded.content_type, bytes = excluded.bytes",
            params![id.to_string(), content_type, bytes],
        )
        .map_err(|e| match e {
            rusqlite::Error::SqliteFailure(err, _)
                if err.code == rusqlite::ErrorCode::ConstraintViolation =>
            {
                Error::UnknownUser
            }
            other => other.into(),
        })?;
        Ok(())
    }

    pub fn profile_image(&self, id: UserId) -> Result<Option<(String, Vec<u8>)>> {
        let conn = self.conn();
        Ok(conn
            .query_row(
                "SELECT content_type, bytes FROM profile_images WHERE user_id = ?1",
                [id.to_string()],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )
            .optional()?)
    }

    /// Removes the account and everything it owns. Evaluation rows survive
    /// with the instructor replaced by a fresh tombstone.
    pub fn delete_user_cascade(&self, id: UserId) -> Result<DeletionReport> {
        let uid = id.to_string();
        self.with_tx(|tx| {
            if select_user(tx, "WHERE u.user_id = ?1", &uid)?.is_none() {
                return Err(Error::UnknownUser);
            }
            let mut report = DeletionReport::default();
            for kind in ResearchKind::ALL {
                let n = tx.execute(
                    "DELETE FROM research_items WHERE owner_id = ?1 AND kind = ?2",
                    params![uid, kind.as_str()],
                )? as u64;
                match kind {
                    ResearchKind::Grant => report.grants = n,
                    ResearchKind::Publication => report.publications = n,
                    ResearchKind::Expenditure => report.expenditures = n,
                }
            }
            report.invite_tokens =
                tx.execute("DELETE FROM invite_tokens WHERE user_id = ?1", [&uid])? as u64;
            report.sessions = tx.execute("DELETE FROM sessions WHERE user_id = ?1", [&uid])? as u64;
            report.profile_images =
                tx.execute("DELETE FROM profile_images WHERE user_id = ?1", [&uid])? as u64;
            let tombstone = InstructorRef::Tombstone(TombstoneId::new());
            report.evaluations_tombstoned = tx.execute(
                "UPDATE evaluations SET instructor_id = NULL, instructor_key = ?2 WHERE instructor_id = ?1",
                params![uid, tombstone.storage_key()],
            )? as u64;
            tx.execute("DELETE FROM users WHERE user_id = ?1", [&uid])?;
            debug!(user = %id, ?report, "deleted user");
            Ok(report)
        })
    }

    // ---- evaluations -----------------------------------------------------

    /// Upserts a batch in one transaction. Any failure leaves the store untouched.
    pub fn upsert_evaluations(&self, records: &[EvaluationRecord]) -> Result<UpsertSummary> {
        for r in records {
            r.validate().map_err(Error::InvariantViolation)?;
        }
        self.with_tx(|tx| {
            let mut summary = UpsertSummary::default();
            for r in records {
                check_instructor_exists(tx, r)?;
                if upsert_evaluation(tx, r)? {
                    summary.replaced += 1;
                } else {
                    summary.inserted += 1;
                }
            }
            Ok(summary)
        })
    }

    /// Evaluations taught by `instructor` within `window`, newest first.
    pub fn evaluations_by_instructor(
        &self,
        instructor: UserId,
        window: &TermWindow,
    ) -> Result<Vec<EvaluationRecord>> {
        let rows = {
            let conn = self.conn();
            select_evaluations(&conn, "WHERE instructor_id = ?1", params![instructor.to_string()])?
        };
        Ok(sort_evaluations(
            rows.into_iter()
                .filter(|(_, e)| window.contains(e.course_key.term_year()))
                .collect(),
        ))
    }

    /// Every evaluation row of a course within `window`, tombstoned rows included.
    pub fn evaluations_for_course(
        &self,
        course: &CourseCode,
        window: &TermWindow,
    ) -> Result<Vec<EvaluationRecord>> {
        let rows = {
            let conn = self.conn();
            select_evaluations(
                &conn,
                "WHERE course_prefix = ?1 AND course_number = ?2",
                params![course.prefix, course.number],
            )?
        };
        Ok(sort_evaluations(
            rows.into_iter()
                .filter(|(_, e)| window.contains(e.course_key.term_year()))
                .collect(),
        ))
    }

    pub fn evaluation_count(&self) -> Result<u64> {
        let conn = self.conn();
        Ok(conn.query_row("SELECT COUNT(*) FROM evaluations", [], |r| r.get::<_, i64>(0))? as u64)
    }

    // ---- research --------------------------------------------------------

    pub fn insert_research_item(&self, item: &ResearchItem) -> Result<()> {
        item.validate().map_err(Error::InvariantViolation)?;
        self.with_tx(|tx| {
            if select_user(tx, "WHERE u.user_id = ?1", &item.owner_id.to_string())?.is_none() {
                return Err(Error::InvariantViolation(vec![FieldError::new(
                    "owner_id",
                    "owner does not exist",
                )]));
            }
            insert_research(tx, item)
        })
    }

    pub fn research_items(&self, kind: ResearchKind, scope: &Scope) -> Result<Vec<ResearchItem>> {
        let mut items = Vec::new();
        {
            let conn = self.conn();
            let mut stmt = conn.prepare(
                "SELECT item_id, owner_id, kind, title, funding_agency, amount_cents, start_date,
                        end_date, venue, publication_year, author_list, description, fiscal_year
                   FROM research_items WHERE owner_id = ?1 AND kind = ?2",
            )?;
            for owner in &scope.owners {
                let rows = stmt.query_map(params![owner.to_string(), kind.as_str()], map_research)?;
                for row in rows {
                    items.push(row??);
                }
            }
        }
        items.retain(|item: &ResearchItem| {
            scope.window.is_none_or(|w| w.contains_year(item.year()))
                && scope.matches_text([item.headline()])
        });
        items.sort_by(|a, b| {
            b.recency_key()
                .cmp(&a.recency_key())
                .then_with(|| a.item_id.cmp(&b.item_id))
        });
        items.dedup_by_key(|i| i.item_id);
        Ok(items)
    }

    // ---- sessions --------------------------------------------------------

    pub fn insert_session(&self, session: &Session) -> Result<()> {
        let conn = self.conn();
        conn.execute(
            "INSERT INTO sessions (session_id, user_id, csrf_token, created_at, expires_at)
             VALUES (?1, ?2, ?3, ?4, ?5)",
            params![
                session.session_id,
                session.user_id.to_string(),
                session.csrf_token,
                ts(session.created_at),
                ts(session.expires_at),
            ],
        )?;
        Ok(())
    }

    pub fn session(&self, session_id: &str) -> Result<Option<Session>> {
        let conn = self.conn();
        conn.query_row(
            "SELECT session_id, user_id, csrf_token, created_at, expires_at FROM sessions WHERE session_id = ?1",
            [session_id],
            |r| {
                Ok(Session {
                    session_id: r.get(0)?,
                    user_id: parse_col(r, 1)?,
                    csrf_token: r.get(2)?,
                    created_at: parse_ts(r, 3)?,
                    expires_at: parse_ts(r, 4)?,
                })
            },
        )
        .optional()
        .map_err(Into::into)
    }

    pub fn delete_session(&self, session_id: &str) -> Result<bool> {
        let conn = self.conn();
        Ok(conn.execute("DELETE FROM sessions WHERE session_id = ?1", [session_id])? == 1)
    }

    /// Revokes every session of `user` except `keep`. Returns how many went.
    pub fn revoke_sessions(&self, user: UserId, keep: Option<&str>) -> Result<u64> {
        let conn = self.conn();
        Ok(conn.execute(
            "DELETE FROM sessions WHERE user_id = ?1 AND session_id IS NOT ?2",
            params![user.to_string(), keep],
        )? as u64)
    }

    pub fn sessions_for_user(&self, user: UserId) -> Result<Vec<String>> {
        let conn = self.conn();
        let mut stmt =
            conn.prepare("SELECT session_id FROM sessions WHERE user_id = ?1 ORDER BY session_id")?;
        let ids = stmt
            .query_map([user.to_string()], |r| r.get(0))?
            .collect::<rusqlite::Result<Vec<String>>>()?;
        Ok(ids)
    }

    // ---- invites ---------------------------------------------------------

    pub fn invites_for_user(&self, user: UserId) -> Result<Vec<InviteToken>> {
        let conn = self.conn();
        let mut stmt = conn.prepare(
            "SELECT token, user_id, issued_at, expires_at, consumed FROM invite_tokens
              WHERE user_id = ?1 ORDER BY issued_at, token",
        )?;
        let tokens = stmt
            .query_map([user.to_string()], map_invite)?
            .collect::<rusqlite::Result<Vec<_>>>()?;
        Ok(tokens)
    }

    /// Pending (not yet redeemed) accounts in a department.
    pub fn pending_accounts(&self, department: &DepartmentId) -> Result<u64> {
        let conn = self.conn();
        Ok(conn.query_row(
            "SELECT COUNT(*) FROM users WHERE department_id = ?1 AND password_hash IS NULL",
            [department.as_str()],
            |r| r.get::<_, i64>(0),
        )? as u64)
    }

    /// Atomic check-and-set: consumes a live token and activates its account.
    /// Unknown, expired and consumed tokens are indistinguishable.
    pub fn redeem_invite(
        &self,
        token: &str,
        now: DateTime<Utc>,
        password_hash: &str,
    ) -> Result<UserAccount> {
        self.with_tx(|tx| {
            let invite = tx
                .query_row(
                    "SELECT token, user_id, issued_at, expires_at, consumed FROM invite_tokens WHERE token = ?1",
                    [token],
                    map_invite,
                )
                .optional()?
                .ok_or(Error::InvalidToken)?;
            if invite.consumed || now >= invite.expires_at {
                return Err(Error::InvalidToken);
            }
            let updated = tx.execute(
                "UPDATE invite_tokens SET consumed = 1 WHERE token = ?1 AND consumed = 0",
                [token],
            )?;
            if updated != 1 {
                return Err(Error::InvalidToken);
            }
            tx.execute(
                "UPDATE users SET password_hash = ?2 WHERE user_id = ?1",
                params![invite.user_id.to_string(), password_hash],
            )?;
            select_user(tx, "WHERE u.user_id = ?1", &invite.user_id.to_string())?
                .ok_or(Error::InvalidToken)
        })
    }
}

fn migrate(conn: &mut Connection) -> Result<()> {
    let current: i64 = conn.pragma_query_value(None, "user_version", |r| r.get(0))?;
    let current = usize::try_from(current).map_err(|_| Error::Schema("negative schema version".into()))?;
    if current > MIGRATIONS.len() {
        return Err(Error::Schema(format!(
            "database schema version {current} is newer than this build ({})",
            MIGRATIONS.len()
        )));
    }
    for (i, sql) in MIGRATIONS.iter().enumerate().skip(current) {
        let tx = conn.transaction()?;
        tx.execute_batch(sql)?;
        tx.pragma_update(None, "user_version", (i + 1) as i64)?;
        tx.commit()?;
        debug!(version = i + 1, "applied migration");
    }
    Ok(())
}

fn ts(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Nanos, true)
}

fn conversion_err(idx: usize, msg: String) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(
        idx,
        rusqlite::types::Type::Text,
        Box::<dyn std::error::Error + Send + Sync>::from(msg),
    )
}

fn parse_ts(r: &Row<'_>, idx: usize) -> rusqlite::Result<DateTime<Utc>> {
    let s: String = r.get(idx)?;
    DateTime::parse_from_rfc3339(&s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| conversion_err(idx, e.to_string()))
}

fn parse_col<T: std::str::FromStr>(r: &Row<'_>, idx: usize) -> rusqlite::Result<T>
where
    T::Err: std::fmt::Display,
{
    let s: String = r.get(idx)?;
    s.parse().map_err(|e: T::Err| conversion_err(idx, e.to_string()))
}

fn password_hash(c: &Credential) -> Option<&str> {
    match c {
        Credential::Password(h) => Some(h),
        Credential::PendingInvite => None,
    }
}

const USER_SELECT: &str = "SELECT u.user_id, u.email, u.first_name, u.last_name, u.role,
        u.department_id, u.password_hash, p.content_type, length(p.bytes)
   FROM users u LEFT JOIN profile_images p ON p.user_id = u.user_id";

fn map_user(r: &Row<'_>) -> rusqlite::Result<UserAccount> {
    let role: Role = parse_col(r, 4)?;
    let hash: Option<String> = r.get(6)?;
    let content_type: Option<String> = r.get(7)?;
    let byte_len: Option<i64> = r.get(8)?;
    Ok(UserAccount {
        user_id: parse_col(r, 0)?,
        email: r.get(1)?,
        first_name: r.get(2)?,
        last_name: r.get(3)?,
        role,
        department_id: DepartmentId::new(r.get::<_, String>(5)?),
        credential: hash.map_or(Credential::PendingInvite, Credential::Password),
        profile_image: content_type.map(|content_type| ImageRef {
            content_type,
            byte_len: byte_len.unwrap_or(0) as u64,
        }),
    })
}

fn select_user(conn: &Connection, clause: &str, arg: &str) -> Result<Option<UserAccount>> {
    Ok(conn
        .query_row(&format!("{USER_SELECT} {clause}"), [arg], map_user)
        .optional()?)
}

fn email_taken(conn: &Connection, email: &str, except: Option<UserId>) -> Result<bool> {
    let owner: Option<String> = conn
        .query_row("SELECT user_id FROM users WHERE email = ?1", [email], |r| r.get(0))
        .optional()?;
    Ok(match (owner, except) {
        (None, _) => false,
        (Some(owner), Some(me)) => owner != me.to_string(),
        (Some(_), None) => true,
    })
}

fn insert_invite(conn: &Connection, token: &InviteToken) -> Result<()> {
    conn.execute(
        "INSERT INTO invite_tokens (token, user_id, issued_at, expires_at, consumed)
         VALUES (?1, ?2, ?3, ?4, ?5)",
        params![
            token.token,
            token.user_id.to_string(),
            ts(token.issued_at),
            ts(token.expires_at),
            token.consumed,
        ],
    )?;
    Ok(())
}

fn map_invite(r: &Row<'_>) -> rusqlite::Result<InviteToken> {
    Ok(InviteToken {
        token: r.get(0)?,
        user_id: parse_col(r, 1)?,
        issued_at: parse_ts(r, 2)?,
        expires_at: parse_ts(r, 3)?,
        consumed: r.get(4)?,
    })
}

fn check_instructor_exists(conn: &Connection, eval: &EvaluationRecord) -> Result<()> {
    if let InstructorRef::User(id) = eval.instructor {
        if select_user(conn, "WHERE u.user_id = ?1", &id.to_string())?.is_none() {
            return Err(Error::InvariantViolation(vec![FieldError::new(
                "instructor",
                format!("instructor {id} does not exist"),
            )]));
        }
    }
    Ok(())
}

/// Returns true when an existing row was replaced.
fn upsert_evaluation(conn: &Connection, e: &EvaluationRecord) -> Result<bool> {
    let key = e.instructor.storage_key();
    let k = &e.course_key;
    let existing: Option<i64> = conn
        .query_row(
            "SELECT eval_id FROM evaluations WHERE instructor_key = ?1 AND course_prefix = ?2
               AND course_number = ?3 AND section = ?4 AND term = ?5 AND year = ?6 AND question_id = ?7",
            params![key, k.prefix, k.number, k.section, k.term.ordinal(), k.year, e.question_id],
            |r| r.get(0),
        )
        .optional()?;
    let [n1, n2, n3, n4, n5] = e.responses;
    match existing {
        Some(id) => {
            conn.execute(
                "UPDATE evaluations SET question_text = ?2, question_category = ?3, n1 = ?4, n2 = ?5,
                        n3 = ?6, n4 = ?7, n5 = ?8, enrollment = ?9 WHERE eval_id = ?1",
                params![
                    id,
                    e.question_text,
                    e.question_category.as_str(),
                    n1,
                    n2,
                    n3,
                    n4,
                    n5,
                    e.enrollment
                ],
            )?;
            Ok(true)
        }
        None => {
            conn.execute(
                "INSERT INTO evaluations (instructor_key, instructor_id, course_prefix, course_number,
                        section, term, year, question_id, question_text, question_category,
                        n1, n2, n3, n4, n5, enrollment)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, ?16)",
                params![
                    key,
                    e.instructor.user().map(|u| u.to_string()),
                    k.prefix,
                    k.number,
                    k.section,
                    k.term.ordinal(),
                    k.year,
                    e.question_id,
                    e.question_text,
                    e.question_category.as_str(),
                    n1,
                    n2,
                    n3,
                    n4,
                    n5,
                    e.enrollment,
                ],
            )?;
            Ok(false)
        }
    }
}

fn select_evaluations(
    conn: &Connection,
    clause: &str,
    args: impl rusqlite::Params,
) -> Result<Vec<(i64, EvaluationRecord)>> {
    let mut stmt = conn.prepare(&format!(
        "SELECT eval_id, instructor_key, course_prefix, course_number, section, term, year,
                question_id, question_text, question_category, n1, n2, n3, n4, n5, enrollment
           FROM evaluations {clause}"
    ))?;
    let rows = stmt
        .query_map(args, |r| {
            let key: String = r.get(1)?;
            let term: i64 = r.get(5)?;
            Ok((
                r.get::<_, i64>(0)?,
                EvaluationRecord {
                    instructor: InstructorRef::from_storage_key(&key)
                        .ok_or_else(|| conversion_err(1, format!("bad instructor key {key}")))?,
                    course_key: CourseKey {
                        prefix: r.get(2)?,
                        number: r.get(3)?,
                        section: r.get(4)?,
                        term: Term::from_ordinal(term)
                            .ok_or_else(|| conversion_err(5, format!("bad term {term}")))?,
                        year: r.get(6)?,
                    },
                    question_id: r.get(7)?,
                    question_text: r.get(8)?,
                    question_category: parse_col::<QuestionCategory>(r, 9)?,
                    responses: [r.get(10)?, r.get(11)?, r.get(12)?, r.get(13)?, r.get(14)?],
                    enrollment: r.get(15)?,
                },
            ))
        })?
        .collect::<rusqlite::Result<Vec<_>>>()?;
    Ok(rows)
}

fn sort_evaluations(mut rows: Vec<(i64, EvaluationRecord)>) -> Vec<EvaluationRecord> {
    rows.sort_by_key(|(id, e)| (Reverse(e.course_key.term_year()), *id));
    rows.dedup_by_key(|(id, _)| *id);
    rows.into_iter().map(|(_, e)| e).collect()
}

fn insert_research(conn: &Connection, item: &ResearchItem) -> Result<()> {
    let base = (
        item.item_id.to_string(),
        item.owner_id.to_string(),
        item.kind().as_str(),
        item.recency_key(),
    );
    match &item.details {
        ResearchDetails::Grant {
            title,
            funding_agency,
            amount,
            start_date,
            end_date,
        } => conn.execute(
            "INSERT INTO research_items (item_id, owner_id, kind, recency_key, title, funding_agency,
                    amount_cents, start_date, end_date)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
            params![
                base.0,
                base.1,
                base.2,
                base.3,
                title,
                funding_agency,
                amount.0 as i64,
                start_date.to_string(),
                end_date.to_string()
            ],
        )?,
        ResearchDetails::Publication {
            title,
            venue,
            publication_year,
            author_list,
        } => conn.execute(
            "INSERT INTO research_items (item_id, owner_id, kind, recency_key, title, venue,
                    publication_year, author_list)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)",
            params![base.0, base.1, base.2, base.3, title, venue, publication_year, author_list],
        )?,
        ResearchDetails::Expenditure {
            description,
            amount,
            fiscal_year,
        } => conn.execute(
            "INSERT INTO research_items (item_id, owner_id, kind, recency_key, description,
                    amount_cents, fiscal_year)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)",
            params![base.0, base.1, base.2, base.3, description, amount.0 as i64, fiscal_year],
        )?,
    };
    Ok(())
}

fn map_research(r: &Row<'_>) -> rusqlite::Result<Result<ResearchItem>> {
    let kind: String = r.get(2)?;
    let date = |idx: usize| -> rusqlite::Result<NaiveDate> { parse_col(r, idx) };
    let cents = |idx: usize| -> rusqlite::Result<Cents> {
        Ok(Cents(r.get::<_, Option<i64>>(idx)?.unwrap_or(0) as u64))
    };
    let text = |idx: usize| -> rusqlite::Result<String> {
        Ok(r.get::<_, Option<String>>(idx)?.unwrap_or_default())
    };
    let details = match kind.as_str() {
        "grant" => ResearchDetails::Grant {
            title: text(3)?,
            funding_agency: text(4)?,
            amount: cents(5)?,
            start_date: date(6)?,
            end_date: date(7)?,
        },
        "publication" => ResearchDetails::Publication {
            title: text(3)?,
            venue: text(8)?,
            publication_year: r.get(9)?,
            author_list: text(10)?,
        },
        "expenditure" => ResearchDetails::Expenditure {
            description: text(11)?,
            amount: cents(5)?,
            fiscal_year: r.get(12)?,
        },
        other => return Ok(Err(Error::UnknownKind(other.to_string()))),
    };
    Ok(Ok(ResearchItem {
        item_id: parse_col::<ItemId>(r, 0)?,
        owner_id: parse_col::<UserId>(r, 1)?,
        details,
    }))
}
