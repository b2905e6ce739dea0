//! The endpoint x role x subject sweep, shared by the rbac and acceptance targets.

use std::fmt;

use axum::http::Method;
use facdash_api::ROUTES;
use facdash_core::authz::{CreationMode, Principal};
use facdash_core::domain::{Role, TermWindow, UserAccount, UserProfile};
use facdash_core::ingest::COLUMNS;
use serde_json::{json, Value};

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Who {
    Chair,
    Faculty,
    Anonymous,
}

/// Whose data the request targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Own,
    Colleague,
    Outsider,
}

pub const WHO: [Who; 3] = [Who::Chair, Who::Faculty, Who::Anonymous];
pub const TARGETS: [Target; 3] = [Target::Own, Target::Colleague, Target::Outsider];

/// Routes that name a subject: a `subject` parameter, a user id, or sheet rows.
pub fn takes_subject(method: &str, path: &str) -> bool {
    matches!(
        (method, path),
        ("GET", "/api/evals")
            | ("GET", "/api/evals/{course}/{section}/questions")
            | ("GET", "/api/analytics/course")
            | ("GET", "/api/grants")
            | ("GET", "/api/publications")
            | ("GET", "/api/expenditures")
            | ("POST", "/api/evals/upload")
            | ("PATCH", "/api/users/{id}")
            | ("DELETE", "/api/users/{id}")
    )
}

/// The documented status (and error code) for every cell.
pub fn expected(method: &str, path: &str, who: Who, target: Target) -> (u16, Option<&'static str>) {
    use Target::*;
    if who == Who::Anonymous {
        return match (method, path) {
            ("POST", "/api/session") => (401, Some("invalid-credentials")),
            ("POST", "/api/invites/{token}/redeem") => (200, None),
            _ => (401, Some("not-authenticated")),
        };
    }
    let chair = who == Who::Chair;
    let wrong_role = (403, Some("wrong-role"));
    let out_of_scope = (403, Some("out-of-scope"));
    match (method, path) {
        ("DELETE", "/api/session") | ("PATCH", "/api/me/password") | ("PUT", "/api/me/photo") => (204, None),
        ("POST", "/api/grants") | ("POST", "/api/publications") | ("POST", "/api/expenditures") => (201, None),
        ("GET", "/api/team") | ("GET", "/api/users") if !chair => wrong_role,
        ("POST", "/api/users") if !chair => wrong_role,
        ("POST", "/api/users") => (201, None),
        ("POST", "/api/evals/upload") | ("PATCH", "/api/users/{id}") | ("DELETE", "/api/users/{id}") if !chair => {
            wrong_role
        }
        ("POST", "/api/evals/upload") if target == Outsider => (422, Some("empty-batch")),
        ("PATCH", "/api/users/{id}") | ("DELETE", "/api/users/{id}") if target == Outsider => out_of_scope,
        ("GET", "/api/analytics/course") => match (chair, target) {
            (_, Own) | (true, Colleague) => (200, None),
            (false, _) => wrong_role,
            (true, Outsider) => out_of_scope,
        },
        (m, p) if m == "GET" && takes_subject(m, p) => match (chair, target) {
            (_, Own) | (true, Colleague) => (200, None),
            _ => out_of_scope,
        },
        _ => (200, None),
    }
}

pub struct Cell {
    pub method: &'static str,
    pub path: &'static str,
    pub who: Who,
    pub target: Target,
    pub expected: (u16, Option<&'static str>),
    pub got: u16,
    pub got_code: Option<String>,
    pub body: String,
}

impl Cell {
    pub fn passed(&self) -> bool {
        self.got == self.expected.0
            && (self.expected.1.is_none() || self.got_code.as_deref() == self.expected.1)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} as {:?} on {:?}: expected {:?}, got {} {:?}",
            self.method, self.path, self.who, self.target, self.expected, self.got, self.got_code
        )
    }
}

/// One department (chair, faculty, colleague and more) plus an outside department.
struct World {
    h: Harness,
    chair: UserAccount,
    faculty: UserAccount,
    colleague: UserAccount,
    outsider: UserAccount,
}

impl World {
    fn new() -> Self {
        let h = Harness::new();
        let (_, users) = h.seed_default(5, true);
        let outsiders = h.seed_outsiders();
        for u in &users[..2] {
            h.platform.store().set_profile_image(u.user_id, "image/png", b"\x89PNG").unwrap();
        }
        World {
            chair: users[0].clone(),
            faculty: users[1].clone(),
            colleague: users[2].clone(),
            outsider: outsiders[1].clone(),
            h,
        }
    }

    fn actor(&self, who: Who) -> &UserAccount {
        match who {
            Who::Chair => &self.chair,
            Who::Faculty | Who::Anonymous => &self.faculty,
        }
    }

    fn subject(&self, who: Who, target: Target) -> &UserAccount {
        match target {
            Target::Own => self.actor(who),
            Target::Colleague => &self.colleague,
            Target::Outsider => &self.outsider,
        }
    }

    fn chair_principal(&self) -> Principal {
        Principal {
            user_id: self.chair.user_id,
            role: Role::Chair,
            department_id: self.chair.department_id.clone(),
            session_id: String::new(),
            csrf_token: String::new(),
        }
    }

    async fn hit(&self, method: &str, path: &str, who: Who, target: Target) -> Resp {
        let login = match who {
            Who::Anonymous => None,
            _ => Some(self.h.login_as(self.actor(who)).await),
        };
        let login = login.as_ref();
        let subject = self.subject(who, target);
        let sid = subject.user_id;
        let m: Method = method.parse().unwrap();
        let h = &self.h;
        match (method, path) {
            ("POST", "/api/session") => match who {
                Who::Anonymous => h.try_login("nobody@demo.edu", SEED_PASSWORD).await,
                _ => h.try_login(&self.actor(who).email, SEED_PASSWORD).await,
            },
            ("PATCH", "/api/me/password") => {
                let body = json!({"old_password": SEED_PASSWORD, "new_password": "a-brand-new-password"});
                h.call(m, path, login, Some(body)).await
            }
            ("PUT", "/api/me/photo") => h.upload(m, path, login, "photo", "p.png", "image/png", b"\x89PNG").await,
            ("GET", "/api/evals") => h.get(&format!("{path}?subject={sid}"), login).await,
            ("GET", "/api/evals/{course}/{section}/questions") => {
                let records = h.platform.store().evaluations_by_instructor(sid, &TermWindow::all_time()).unwrap();
                let key = &records[0].course_key;
                let url = format!("/api/evals/{}/{}/questions?subject={sid}", key.course(), key.section);
                h.get(&url, login).await
            }
            ("GET", "/api/analytics/course") => {
                h.get(&format!("{path}?course=CSCE-145&metric=instructor&subject={sid}"), login).await
            }
            ("GET", "/api/grants") | ("GET", "/api/publications") | ("GET", "/api/expenditures") => {
                h.get(&format!("{path}?subject={sid}"), login).await
            }
            ("POST", "/api/grants") => {
                let body = json!({"title": "T", "funding_agency": "NSF", "amount": "10.00",
                                  "start_date": "2024-01-01", "end_date": "2024-12-31"});
                h.call(m, path, login, Some(body)).await
            }
            ("POST", "/api/publications") => {
                let body = json!({"title": "T", "venue": "V", "publication_year": "2024", "author_list": "A"});
                h.call(m, path, login, Some(body)).await
            }
            ("POST", "/api/expenditures") => {
                let body = json!({"description": "D", "amount": "5.00", "fiscal_year": "2024"});
                h.call(m, path, login, Some(body)).await
            }
            ("POST", "/api/evals/upload") => {
                let sheet = format!(
                    "{}\n{},CSCE,999,900,Fall,2024,Q1,Clear?,instructor,0,0,1,2,3,9\n",
                    COLUMNS.join(","),
                    subject.email
                );
                h.upload(m, path, login, "file", "e.csv", "text/csv", sheet.as_bytes()).await
            }
            ("POST", "/api/users") => {
                let body = json!({"email": "fresh@demo.edu", "first_name": "Fay", "last_name": "Fresh",
                                  "role": "faculty", "mode": "manual", "password": "fresh-password-1"});
                h.call(m, path, login, Some(body)).await
            }
            ("PATCH", "/api/users/{id}") => {
                h.call(m, &format!("/api/users/{sid}"), login, Some(json!({"first_name": "Renamed"}))).await
            }
            ("DELETE", "/api/users/{id}") => h.call(m, &format!("/api/users/{sid}"), login, None).await,
            ("POST", "/api/invites/{token}/redeem") => {
                let created = h
                    .platform
                    .create_user(
                        &self.chair_principal(),
                        UserProfile {
                            email: "redeemer@demo.edu".into(),
                            first_name: "Rhea".into(),
                            last_name: "Redeemer".into(),
                            role: Role::Faculty,
                        },
                        CreationMode::Invite,
                    )
                    .unwrap();
                let token = created.invite.unwrap().token;
                let body = json!({"password": "redeemed-password"});
                h.call(m, &format!("/api/invites/{token}/redeem"), login, Some(body)).await
            }
            _ => h.call(m, path, login, None).await,
        }
    }
}

/// Secrets that must never appear in any response body.
fn secrets(world: &World) -> Vec<String> {
    let mut out = Vec::new();
    for u in [&world.chair, &world.faculty, &world.colleague, &world.outsider] {
        if let Some(acct) = world.h.platform.store().user(u.user_id).unwrap() {
            if let facdash_core::domain::Credential::Password(hash) = &acct.credential {
                out.push(hash.clone());
            }
        }
    }
    out
}

/// Runs every cell. GET cells share a world; anything else gets a fresh one.
pub async fn sweep() -> Vec<Cell> {
    let shared = World::new();
    let mut cells = Vec::new();
    for &(method, path) in ROUTES {
        let targets: &[Target] = if takes_subject(method, path) { &TARGETS } else { &TARGETS[..1] };
        for who in WHO {
            for &target in targets {
                let fresh;
                let world = if method == "GET" {
                    &shared
                } else {
                    fresh = World::new();
                    &fresh
                };
                let res = world.hit(method, path, who, target).await;
                let body = res.text();
                for secret in secrets(world) {
                    assert!(!body.contains(&secret), "{method} {path} leaked a credential hash");
                }
                assert!(!body.contains("argon2"), "{method} {path} leaked a credential hash");
                cells.push(Cell {
                    method,
                    path,
                    who,
                    target,
                    expected: expected(method, path, who, target),
                    got: res.status.as_u16(),
                    got_code: res.code(),
                    body,
                });
            }
        }
    }
    cells
}

/// Statuses each operation documents in `openapi.json`.
pub fn documented_statuses(method: &str, path: &str) -> Vec<u16> {
    let doc: Value = serde_json::from_str(include_str!("../../openapi.json")).unwrap();
    doc["paths"][path][method.to_lowercase()]["responses"]
        .as_object()
        .map(|r| r.keys().map(|k| k.parse().unwrap()).collect())
        .unwrap_or_default()
}
