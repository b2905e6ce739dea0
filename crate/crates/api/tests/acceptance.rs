//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::future::Future;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use axum::http::Method;
use common::rbac::sweep;
use common::*;
use facdash_core::analytics::{kde_bandwidth, kde_curve, percentile_rank, GaussianKde, GRID_POINTS};
use facdash_core::domain::{Credential, DepartmentId, Role, UserAccount, UserProfile};
use facdash_core::ingest::COLUMNS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_xlsxwriter::Workbook;
use serde_json::{json, Value};

/// Mid-rank percentile by counting, then the nearest tenth found by
/// exhaustive search with exact integer comparisons (halves go up).
fn percentile_oracle(value: f64, population: &[f64]) -> Option<f64> {
    let below = population.iter().filter(|&&p| p < value).count() as i128;
    let equal = population.iter().filter(|&&p| p == value).count() as i128;
    if equal == 0 {
        return None;
    }
    let num = 100 * (2 * below + equal);
    let den = 2 * population.len() as i128;
    let mut best = 0i128;
    for t in 0..=1000i128 {
        let d_t = (t * den - 10 * num).abs();
        let d_best = (best * den - 10 * num).abs();
        if d_t < d_best || (d_t == d_best && t > best) {
            best = t;
        }
    }
    Some(best as f64 / 10.0)
}

async fn percentile_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let n = rng.random_range(1..=50);
        // Quarter steps on [1, 5] make ties common.
        let levels = rng.random_range(1..=17);
        let pop: Vec<f64> = (0..n).map(|_| 1.0 + rng.random_range(0..levels) as f64 * 0.25).collect();
        let value = pop[rng.random_range(0..n)];
        let got = percentile_rank(value, &pop).unwrap();
        assert_eq!(Some(got), percentile_oracle(value, &pop), "case {case}: {value} in {pop:?}");
    }
    assert!(start.elapsed() < Duration::from_secs(5), "took {:?}", start.elapsed());
}

async fn kde_soundness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(4..=60);
        let samples: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=5.0)).collect();
        if samples.iter().all(|&s| s == samples[0]) {
            continue;
        }
        done += 1;
        let curve = kde_curve(&samples, None).unwrap();
        assert_eq!(curve.grid.len(), GRID_POINTS);
        assert_eq!(curve.density.len(), GRID_POINTS);
        assert!(curve.grid.windows(2).all(|w| w[0] < w[1]), "grid not ascending");
        assert!(curve.density.iter().all(|&d| d >= 0.0));
        let integral = curve.trapezoid_integral();
        assert!((0.99..=1.01).contains(&integral), "integral {integral} for {samples:?}");

        let c = rng.random_range(-3.0..3.0);
        let shifted: Vec<f64> = samples.iter().map(|s| s + c).collect();
        let (a, b) = (GaussianKde::new(&samples).unwrap(), GaussianKde::new(&shifted).unwrap());
        for &x in &curve.grid {
            let (da, db) = (a.density(x), b.density(x + c));
            assert!((da - db).abs() <= 1e-9, "shift {c} at {x}: {da} vs {db}");
        }
    }
    assert!(start.elapsed() < Duration::from_secs(10), "took {:?}", start.elapsed());
}

async fn hand_checks() {
    let h = kde_bandwidth(&[3.0, 5.0]).unwrap();
    assert!((h - 1.2311).abs() <= 1e-3, "bandwidth {h}");
    assert_eq!(percentile_rank(4.0, &[2.0, 2.0, 4.0, 4.0]), Ok(75.0));
    assert_eq!(percentile_oracle(4.0, &[2.0, 2.0, 4.0, 4.0]), Some(75.0));
}

fn fixture_histogram(instructor: u32, course: u32, question: u32) -> [u32; 5] {
    std::array::from_fn(|k| (instructor * 7 + course * 3 + question * 5 + k as u32 * 11) % 9)
}

/// 3 instructors x 2 courses x 4 questions, as an xlsx workbook.
fn fixture_workbook(emails: &[String]) -> Vec<u8> {
    let mut wb = Workbook::new();
    let ws = wb.add_worksheet();
    for (c, name) in COLUMNS.iter().enumerate() {
        ws.write_string(0, c as u16, *name).unwrap();
    }
    let mut r = 1;
    for (i, email) in emails.iter().enumerate() {
        for (c, number) in ["145", "240"].iter().enumerate() {
            for q in 1..=4u32 {
                let category = if q <= 2 { "course" } else { "instructor" };
                let hist = fixture_histogram(i as u32 + 1, c as u32 + 1, q);
                ws.write_string(r, 0, email).unwrap();
                ws.write_string(r, 1, "CSCE").unwrap();
                ws.write_number(r, 2, number.parse::<f64>().unwrap()).unwrap();
                ws.write_string(r, 3, "001").unwrap();
                ws.write_string(r, 4, "Fall").unwrap();
                ws.write_number(r, 5, 2024.0).unwrap();
                ws.write_string(r, 6, format!("Q{q}")).unwrap();
                ws.write_string(r, 7, format!("Question {q}")).unwrap();
                ws.write_string(r, 8, category).unwrap();
                for (k, n) in hist.iter().enumerate() {
                    ws.write_number(r, 9 + k as u16, *n as f64).unwrap();
                }
                ws.write_number(r, 14, 40.0).unwrap();
                r += 1;
            }
        }
    }
    wb.save_to_buffer().unwrap()
}

/// (instructor, course number, avg course rating, avg instructor rating),
/// computed by hand from the fixture histograms.
const FIXTURE_AVERAGES: [(usize, &str, f64, f64); 6] = [
    (0, "145", 2.8954, 2.8467),
    (0, "240", 3.3056, 2.9103),
    (1, "145", 3.3409, 2.8681),
    (1, "240", 2.8467, 2.8826),
    (2, "145", 3.1003, 2.8358),
    (2, "240", 2.8681, 2.8954),
];

fn account(email: &str, first: &str, role: Role, hash: &str) -> UserAccount {
    UserAccount::new(
        UserProfile {
            email: email.into(),
            first_name: first.into(),
            last_name: "Fixture".into(),
            role,
        },
        DepartmentId::new("cse"),
        Credential::Password(hash.into()),
    )
}

/// Raw `/api/evals` bodies, one per instructor.
async fn evals_snapshot(h: &Harness, login: &Login, instructors: &[UserAccount]) -> Vec<Vec<u8>> {
    let mut bodies = Vec::new();
    for u in instructors {
        let url = format!("/api/evals?subject={}", u.user_id);
        bodies.push(h.get(&url, Some(login)).await.expect(200).body);
    }
    bodies
}

async fn ingestion_round_trip() {
    let h = Harness::new();
    let hash = facdash_core::authz::hash_credential(SEED_PASSWORD).unwrap();
    let chair = account("chair@fixture.edu", "Chair", Role::Chair, &hash);
    let faculty: Vec<UserAccount> = ["ada", "bo", "cy"]
        .iter()
        .map(|n| account(&format!("{n}@fixture.edu"), n, Role::Faculty, &hash))
        .collect();
    for u in std::iter::once(&chair).chain(&faculty) {
        h.platform.store().create_account(u, None).unwrap();
    }
    let emails: Vec<String> = faculty.iter().map(|u| u.email.clone()).collect();
    let workbook = fixture_workbook(&emails);
    let login = h.login_as(&chair).await;

    let first = h.upload_sheet(&login, "fixture.xlsx", &workbook).await.expect(200).json();
    assert_eq!(first["totals"]["accepted"], 24);
    assert_eq!(first["totals"]["rejected"], 0);
    assert_eq!(first["summary"], json!({"inserted": 24, "replaced": 0}));

    let before = evals_snapshot(&h, &login, &faculty).await;
    for &(who, number, course_avg, instr_avg) in &FIXTURE_AVERAGES {
        let page: Value = serde_json::from_slice(&before[who]).unwrap();
        let section = page["items"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["course_key"]["number"] == number)
            .unwrap_or_else(|| panic!("no {number} section for instructor {who}"));
        assert_eq!(section["avg_course_rating"].as_f64(), Some(course_avg), "{who} {number}");
        assert_eq!(section["avg_instructor_rating"].as_f64(), Some(instr_avg), "{who} {number}");
    }

    let again = h.upload_sheet(&login, "fixture.xlsx", &workbook).await.expect(200).json();
    assert_eq!(again["summary"], json!({"inserted": 0, "replaced": 24}));
    assert_eq!(evals_snapshot(&h, &login, &faculty).await, before, "analytics changed after re-upload");
}

async fn rbac_matrix() {
    let cells = sweep().await;
    let off: Vec<String> = cells.iter().filter(|c| !c.passed()).map(|c| c.to_string()).collect();
    assert!(off.is_empty(), "{} of {} cells off:\n{}", off.len(), cells.len(), off.join("\n"));
    let stray = cells.iter().filter(|c| c.got == 200 && c.expected.0 != 200).count();
    assert_eq!(stray, 0, "undocumented 200s");
}

async fn anonymization() {
    for members in 4..=10 {
        let h = Harness::new();
        let (plan, users) = h.seed_default(members - 1, true);
        assert_eq!(users.len(), members);
        let courses: Vec<String> = plan
            .evaluations_csv
            .split(|&b| b == b'\n')
            .skip(1)
            .filter_map(|line| {
                let line = String::from_utf8_lossy(line).into_owned();
                let cols: Vec<&str> = line.split(',').collect();
                (cols.len() > 2).then(|| format!("{}-{}", cols[1], cols[2]))
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        for me in &users[1..] {
            let login = h.login_as(me).await;
            for course in &courses {
                for metric in ["course", "instructor"] {
                    let res = h
                        .get(&format!("/api/analytics/course?course={course}&metric={metric}"), Some(&login))
                        .await;
                    assert!(matches!(res.status.as_u16(), 200 | 422), "{}", res.text());
                    let body = res.text();
                    for other in users.iter().filter(|u| u.user_id != me.user_id) {
                        for secret in [
                            other.email.clone(),
                            other.first_name.clone(),
                            other.last_name.clone(),
                            other.user_id.to_string(),
                        ] {
                            assert!(!body.contains(&secret), "{course} leaks {secret} to {}", me.email);
                        }
                    }
                }
            }
        }
    }
    let h = Harness::new();
    let (_, users) = h.seed_default(2, true);
    let login = h.login_as(&users[1]).await;
    let res = h.get("/api/analytics/course?course=CSCE-145", Some(&login)).await.expect(422);
    assert_eq!(res.code().as_deref(), Some("insufficient-cohort"));
}

async fn invite_lifecycle() {
    let h = Harness::new();
    let (_, users) = h.seed_default(2, false);
    let chair = h.login_as(&users[0]).await;
    let invite = |email: &'static str| {
        let body = json!({"email": email, "first_name": "Ivy", "last_name": "Invitee", "role": "faculty"});
        h.call(Method::POST, "/api/users", Some(&chair), Some(body))
    };
    let created = invite("ivy@demo.edu").await.expect(201).json();
    let id = created["user"]["user_id"].as_str().unwrap().parse().unwrap();
    let stored = h.platform.store().invites_for_user(id).unwrap();
    assert_eq!(stored.len(), 1);
    let mail = h.mail.messages_to("ivy@demo.edu");
    assert_eq!(mail.len(), 1);
    assert!(mail[0].body.contains(&format!("{BASE_URL}/set-password?token={}", stored[0].token)));

    let path = format!("/api/invites/{}/redeem", stored[0].token);
    let pw = json!({"password": "chosen-password-1"});
    h.call(Method::POST, &path, None, Some(pw.clone())).await.expect(200);
    let res = h.call(Method::POST, &path, None, Some(pw.clone())).await.expect(400);
    assert_eq!(res.code().as_deref(), Some("invalid-token"));
    h.login("ivy@demo.edu", "chosen-password-1").await;

    let created = invite("late@demo.edu").await.expect(201).json();
    let id = created["user"]["user_id"].as_str().unwrap().parse().unwrap();
    let token = h.platform.store().invites_for_user(id).unwrap()[0].token.clone();
    assert_eq!(h.mail.messages_to("late@demo.edu").len(), 1);
    h.clock.advance(chrono::Duration::hours(73));
    let res = h
        .call(Method::POST, &format!("/api/invites/{token}/redeem"), None, Some(pw))
        .await
        .expect(400);
    assert_eq!(res.code().as_deref(), Some("invalid-token"));
    assert_eq!(h.mail.messages().len(), 2);
}

async fn end_to_end() {
    let h = Harness::new();
    let (plan, users) = h.seed_default(6, false);
    let chair = h.login_as(&users[0]).await;
    let rows = 7 * 3 * 2 * 2 * 5;
    let up = h.upload_sheet(&chair, "demo.csv", &plan.evaluations_csv).await.expect(200).json();
    assert_eq!(up["totals"]["accepted"], rows);
    assert_eq!(up["summary"]["inserted"], rows);

    let me = &users[3];
    let login = h.login_as(me).await;
    let evals = h.get("/api/evals", Some(&login)).await.expect(200).json();
    let sections = evals["items"].as_array().unwrap();
    assert_eq!(evals["total"], 12);
    assert!(sections.iter().all(|s| s["instructor"]["user"] == me.user_id.to_string()));

    let dash = h.get("/api/dashboard", Some(&login)).await.expect(200).json();
    assert_eq!(dash["recent_evals"].as_array().unwrap()[..], sections[..4]);
    assert_eq!(dash["pending_actions"], 0);
    assert_eq!(dash["research_year"], 2024);

    let shared: Vec<f64> = sections
        .iter()
        .filter(|s| s["course_key"]["number"] == "145")
        .map(|s| s["avg_instructor_rating"].as_f64().unwrap())
        .collect();
    let analytics = h
        .get("/api/analytics/course?course=CSCE-145&metric=instructor", Some(&login))
        .await
        .expect(200)
        .json();
    assert_eq!(analytics["curve"]["cohort_n"], 7);
    assert_eq!(analytics["sections"].as_array().unwrap().len(), shared.len());
    let mine = analytics["subject_average"].as_f64().unwrap();
    let expected = shared.iter().sum::<f64>() / shared.len() as f64;
    assert!((mine - expected).abs() < 1e-4, "{mine} vs {expected}");
    assert_eq!(analytics["curve"]["highlight"]["value"].as_f64(), Some(mine));

    let mut research_2024 = [0u64; 3];
    for (i, (path, kind)) in [("grants", "grant"), ("publications", "publication"), ("expenditures", "expenditure")]
        .into_iter()
        .enumerate()
    {
        let planned: Vec<_> = plan
            .research
            .iter()
            .filter(|r| r.owner_email == me.email && r.kind.as_str() == kind)
            .collect();
        let listed = h.get(&format!("/api/{path}"), Some(&login)).await.expect(200).json();
        assert_eq!(listed["total"], planned.len(), "{path}");
        for item in listed["items"].as_array().unwrap() {
            assert_eq!(item["owner_id"], me.user_id.to_string());
        }
        research_2024[i] = planned
            .iter()
            .filter(|r| {
                let year = match kind {
                    "grant" => &r.fields["start_date"][..4],
                    "publication" => r.fields["publication_year"].as_str(),
                    _ => r.fields["fiscal_year"].as_str(),
                };
                year == "2024"
            })
            .count() as u64;
    }
    let totals = &dash["research_totals"];
    assert_eq!(totals["grant_count"], research_2024[0]);
    assert_eq!(totals["publication_count"], research_2024[1]);
    assert_eq!(totals["expenditure_count"], research_2024[2]);

    let colleague = users[4].user_id;
    h.get(&format!("/api/evals?subject={colleague}"), Some(&login)).await.expect(403);
    h.get("/api/team", Some(&login)).await.expect(403);
    let team = h.get("/api/team", Some(&chair)).await.expect(200).json();
    assert_eq!(team["total"], 7);
}

async fn run<F: Future<Output = ()> + Send + 'static>(name: &str, criterion: F) -> bool {
    let start = Instant::now();
    let outcome = tokio::spawn(criterion).await;
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => {
            println!("PASS  {name}  ({secs:.2}s)");
            true
        }
        Err(e) => {
            let why = e
                .try_into_panic()
                .ok()
                .and_then(|p| {
                    p.downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                })
                .unwrap_or_default();
            println!("FAIL  {name}  ({secs:.2}s)  {}", why.lines().next().unwrap_or(""));
            false
        }
    }
}

fn main() -> ExitCode {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let start = Instant::now();
    let results = rt.block_on(async {
        vec![
            run("percentile oracle equivalence (1000 populations, < 5 s)", percentile_oracle_equivalence()).await,
            run("KDE soundness (200 sample sets, < 10 s)", kde_soundness()).await,
            run("hand checks: bandwidth([3,5]) and percentile(4, [2,2,4,4])", hand_checks()).await,
            run("ingestion round trip (3x2x4 workbook, idempotent re-upload)", ingestion_round_trip()).await,
            run("RBAC matrix (endpoint x role x subject)", rbac_matrix()).await,
            run("anonymization leak scan (departments of 4-10) and cohort floor", anonymization()).await,
            run("invite lifecycle (single use, 72 h expiry, one mail per invite)", invite_lifecycle()).await,
            run("end to end: seed, upload, faculty views", end_to_end()).await,
        ]
    });
    let elapsed = start.elapsed();
    let within = elapsed < Duration::from_secs(180);
    println!(
        "{}  full suite under 3 minutes ({:.1}s)",
        if within { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let passed = results.iter().filter(|&&ok| ok).count() + usize::from(within);
    println!("{passed}/{} acceptance criteria passed", results.len() + 1);
    if passed == results.len() + 1 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
