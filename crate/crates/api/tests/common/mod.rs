#![allow(dead_code)]

pub mod rbac;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use facdash_api::{router, AppState, CSRF_HEADER};
use facdash_core::clock::ManualClock;
use facdash_core::domain::{DepartmentId, UserAccount};
use facdash_core::mail::MemoryMailer;
use facdash_core::seed::{plan_department, SeedOptions, SeedPlan};
use facdash_core::store::Store;
use facdash_core::{Platform, Settings};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const SEED_PASSWORD: &str = "demo-password-1";
pub const BASE_URL: &str = "https://dash.example.edu";

pub struct Harness {
    pub app: Router,
    pub platform: Arc<Platform>,
    pub clock: ManualClock,
    pub mail: MemoryMailer,
}

pub struct Resp {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Resp {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("not JSON ({e}): {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    pub fn code(&self) -> Option<String> {
        serde_json::from_slice::<Value>(&self.body)
            .ok()
            .and_then(|v| v.get("code").and_then(Value::as_str).map(str::to_string))
    }

    #[track_caller]
    pub fn expect(self, status: u16) -> Self {
        assert_eq!(self.status.as_u16(), status, "body: {}", self.text());
        self
    }
}

/// A logged-in browser: the session cookie and the CSRF token to echo.
#[derive(Debug, Clone)]
pub struct Login {
    pub cookie: String,
    pub csrf: String,
    pub user: Value,
}

impl Login {
    pub fn user_id(&self) -> String {
        self.user["user_id"].as_str().unwrap().to_string()
    }
}

pub fn multipart(field: &str, file_name: &str, content_type: &str, bytes: &[u8]) -> (String, Vec<u8>) {
    let boundary = "----facdash-test-boundary-7MA4YWxkTrZu0gW";
    let mut body = Vec::new();
    body.extend_from_slice(
        format!(
            "--{boundary}\r\nContent-Disposition: form-data; name=\"{field}\"; filename=\"{file_name}\"\r\nContent-Type: {content_type}\r\n\r\n"
        )
        .as_bytes(),
    );
    body.extend_from_slice(bytes);
    body.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

impl Harness {
    pub fn new() -> Self {
        Self::with_settings(Settings::default(), 10 * 1024 * 1024)
    }

    pub fn with_settings(settings: Settings, max_upload_bytes: usize) -> Self {
        let clock = ManualClock::new(Utc.with_ymd_and_hms(2024, 9, 2, 9, 0, 0).unwrap());
        let mail = MemoryMailer::new();
        let platform = Arc::new(
            Platform::new(
                Store::open_in_memory().unwrap(),
                Settings {
                    base_url: BASE_URL.into(),
                    ..settings
                },
            )
            .with_clock(Arc::new(clock.clone()))
            .with_mailer(Arc::new(mail.clone())),
        );
        let app = router(
            AppState {
                platform: platform.clone(),
                max_upload_bytes,
                secure_cookies: true,
            },
            None,
        );
        Self {
            app,
            platform,
            clock,
            mail,
        }
    }

    /// Seeds a department; the chair comes first in the returned accounts.
    pub fn seed(&self, options: SeedOptions, with_evaluations: bool) -> (SeedPlan, Vec<UserAccount>) {
        let plan = plan_department(&options);
        let outcome = self.platform.seed_department(&plan, with_evaluations).unwrap();
        (plan, outcome.users)
    }

    pub fn seed_default(&self, faculty: usize, with_evaluations: bool) -> (SeedPlan, Vec<UserAccount>) {
        self.seed(
            SeedOptions {
                faculty,
                ..SeedOptions::default()
            },
            with_evaluations,
        )
    }

    /// A second department, for out-of-scope checks.
    pub fn seed_outsiders(&self) -> Vec<UserAccount> {
        self.seed(
            SeedOptions {
                seed: 99,
                faculty: 4,
                department: DepartmentId::new("ee"),
                email_domain: "ee.demo.edu".into(),
                ..SeedOptions::default()
            },
            true,
        )
        .1
    }

    pub async fn send(&self, req: Request<Body>) -> Resp {
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let headers = res.headers().clone();
        let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
        Resp { status, headers, body }
    }

    pub fn request(method: Method, path: &str, who: Option<&Login>) -> axum::http::request::Builder {
        let mut b = Request::builder().method(method.clone()).uri(path);
        if let Some(login) = who {
            b = b.header(header::COOKIE, format!("fd_session={}", login.cookie));
            if method != Method::GET {
                b = b.header(CSRF_HEADER, &login.csrf);
            }
        }
        b
    }

    pub async fn call(&self, method: Method, path: &str, who: Option<&Login>, body: Option<Value>) -> Resp {
        let b = Self::request(method, path, who);
        let req = match body {
            Some(v) => b
                .header(header::CONTENT_TYPE, "application/json")
                .body(Body::from(v.to_string()))
                .unwrap(),
            None => b.body(Body::empty()).unwrap(),
        };
        self.send(req).await
    }

    pub async fn get(&self, path: &str, who: Option<&Login>) -> Resp {
        self.call(Method::GET, path, who, None).await
    }

    #[allow(clippy::too_many_arguments)]
    pub async fn upload(
        &self,
        method: Method,
        path: &str,
        who: Option<&Login>,
        field: &str,
        file_name: &str,
        content_type: &str,
        bytes: &[u8],
    ) -> Resp {
        let (ct, body) = multipart(field, file_name, content_type, bytes);
        let req = Self::request(method, path, who)
            .header(header::CONTENT_TYPE, ct)
            .body(Body::from(body))
            .unwrap();
        self.send(req).await
    }

    pub async fn upload_sheet(&self, who: &Login, file_name: &str, bytes: &[u8]) -> Resp {
        let ct = if file_name.ends_with(".csv") {
            "text/csv"
        } else {
            "application/vnd.openxmlformats-officedocument.spreadsheetml.sheet"
        };
        self.upload(Method::POST, "/api/evals/upload", Some(who), "file", file_name, ct, bytes)
            .await
    }

    pub async fn try_login(&self, email: &str, password: &str) -> Resp {
        self.call(
            Method::POST,
            "/api/session",
            None,
            Some(serde_json::json!({ "email": email, "password": password })),
        )
        .await
    }

    pub async fn login(&self, email: &str, password: &str) -> Login {
        let res = self.try_login(email, password).await.expect(200);
        let set_cookie = res.headers[header::SET_COOKIE].to_str().unwrap().to_string();
        let cookie = set_cookie
            .split(';')
            .next()
            .unwrap()
            .strip_prefix("fd_session=")
            .unwrap()
            .to_string();
        let body = res.json();
        Login {
            cookie,
            csrf: body["csrf_token"].as_str().unwrap().to_string(),
            user: body["user"].clone(),
        }
    }

    pub async fn login_as(&self, user: &UserAccount) -> Login {
        self.login(&user.email, SEED_PASSWORD).await
    }
}

pub fn enc(s: &str) -> String {
    s.replace(' ', "%20").replace('+', "%2B")
}
