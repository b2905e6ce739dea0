//! Deterministic synthetic demo department.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::authz::hash_credential;
use crate::domain::{
    Credential, DepartmentId, EvaluationRecord, ResearchKind, Role, UserAccount, UserId,
    UserProfile,
};
use crate::error::Result;
use crate::ingest::{parse_eval_workbook, validate_research_item, write_canonical_csv, WorkbookFormat};
use crate::platform::Platform;

const FIRST_NAMES: [&str; 16] = [
    "Adaeze", "Bartholomew", "Cordelia", "Desmond", "Evangeline", "Fitzgerald", "Gwendolyn",
    "Horatio", "Imogen", "Jebediah", "Katarina", "Leopold", "Marisol", "Nikolai", "Ottoline",
    "Percival",
];

const LAST_NAMES: [&str; 16] = [
    "Abernathy", "Blackwood", "Castellanos", "Drummond", "Ellingsworth", "Fairweather",
    "Grimaldi", "Hollingsworth", "Ivanova", "Jorgensen", "Kowalczyk", "Lindqvist", "Montgomery",
    "Nakamura", "Okonkwo", "Papadopoulos",
];

const COURSES: [(&str, &str); 6] = [
    ("CSCE", "145"),
    ("CSCE", "146"),
    ("CSCE", "240"),
    ("CSCE", "350"),
    ("CSCE", "416"),
    ("CSCE", "490"),
];

/// Every faculty member teaches the first course, so it always has a full cohort.
const SHARED_COURSE: usize = 0;

const QUESTIONS: [(&str, &str, &str); 5] = [
    ("C1", "The course was well organized.", "course"),
    ("C2", "Course materials supported my learning.", "course"),
    ("I1", "The instructor explained concepts clearly.", "instructor"),
    ("I2", "The instructor was available outside class.", "instructor"),
    ("O1", "Hours per week spent on this course.", "other"),
];

#[derive(Debug, Clone)]
pub struct SeedOptions {
    pub seed: u64,
    pub faculty: usize,
    pub department: DepartmentId,
    pub email_domain: String,
    /// Shared by every seeded account.
    pub password: String,
    pub first_year: i32,
    pub last_year: i32,
}

impl Default for SeedOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            faculty: 6,
            department: DepartmentId::new("cse"),
            email_domain: "demo.edu".into(),
            password: "demo-password-1".into(),
            first_year: 2022,
            last_year: 2024,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeedUser {
    pub profile: UserProfile,
    /// Indices into the course table.
    pub courses: Vec<usize>,
    pub quality: f64,
}

#[derive(Debug, Clone)]
pub struct SeedResearch {
    pub owner_email: String,
    pub kind: ResearchKind,
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct SeedPlan {
    pub options: SeedOptions,
    /// The chair comes first.
    pub users: Vec<SeedUser>,
    pub research: Vec<SeedResearch>,
    /// Canonical evaluation sheet, ready to upload.
    pub evaluations_csv: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub users: Vec<UserAccount>,
    pub research_items: usize,
    pub evaluations: u64,
}

fn fields(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Builds the whole department from `options.seed` alone.
pub fn plan_department(options: &SeedOptions) -> SeedPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut names: Vec<(usize, usize)> = (0..FIRST_NAMES.len())
        .flat_map(|f| (0..LAST_NAMES.len()).map(move |l| (f, l)))
        .collect();
    names.shuffle(&mut rng);
    // Distinct first and last names keep every person easy to find in output.
    let mut picked: Vec<(usize, usize)> = Vec::new();
    for (f, l) in names {
        if picked.iter().all(|&(pf, pl)| pf != f && pl != l) {
            picked.push((f, l));
        }
    }
    let count = (options.faculty + 1).min(picked.len());

    let mut users = Vec::new();
    for (i, &(f, l)) in picked.iter().take(count).enumerate() {
        let first = FIRST_NAMES[f];
        let last = LAST_NAMES[l];
        let mut courses = vec![SHARED_COURSE];
        let extra = rng.random_range(1..COURSES.len());
        courses.push(extra);
        users.push(SeedUser {
            profile: UserProfile {
                email: format!(
                    "{}.{}@{}",
                    first.to_lowercase(),
                    last.to_lowercase(),
                    options.email_domain
                ),
                first_name: first.into(),
                last_name: last.into(),
                role: if i == 0 { Role::Chair } else { Role::Faculty },
            },
            courses,
            quality: rng.random_range(2.6..4.8),
        });
    }

    let mut research = Vec::new();
    for u in &users {
        let email = &u.profile.email;
        for g in 0..rng.random_range(0..3) {
            let year = rng.random_range(options.first_year..=options.last_year);
            let dollars: u64 = rng.random_range(20..900) * 1000;
            research.push(SeedResearch {
                owner_email: email.clone(),
                kind: ResearchKind::Grant,
                fields: fields(&[
                    ("title", format!("{} research program {}", u.profile.last_name, g + 1)),
                    ("funding_agency", ["NSF", "NIH", "DOE", "DARPA"][rng.random_range(0..4)].into()),
                    ("amount", format!("{dollars}.00")),
                    ("start_date", format!("{year}-0{}-01", rng.random_range(1..10))),
                    ("end_date", format!("{}-06-30", year + rng.random_range(1..4))),
                ]),
            });
        }
        for p in 0..rng.random_range(1..4) {
            research.push(SeedResearch {
                owner_email: email.clone(),
                kind: ResearchKind::Publication,
                fields: fields(&[
                    ("title", format!("Study {} on scalable systems", p + 1)),
                    ("venue", ["ICSE", "SIGMOD", "NeurIPS", "CHI"][rng.random_range(0..4)].into()),
                    (
                        "publication_year",
                        rng.random_range(options.first_year..=options.last_year).to_string(),
                    ),
                    ("author_list", format!("{} {}", u.profile.first_name, u.profile.last_name)),
                ]),
            });
        }
        for _ in 0..rng.random_range(0..3) {
            research.push(SeedResearch {
                owner_email: email.clone(),
                kind: ResearchKind::Expenditure,
                fields: fields(&[
                    ("description", "Lab equipment".into()),
                    ("amount", format!("{}.{:02}", rng.random_range(100..20000), rng.random_range(0..100))),
                    (
                        "fiscal_year",
                        rng.random_range(options.first_year..=options.last_year).to_string(),
                    ),
                ]),
            });
        }
    }

    let evaluations_csv = evaluation_sheet(&users, options, &mut rng);
    SeedPlan {
        options: options.clone(),
        users,
        research,
        evaluations_csv,
    }
}

fn evaluation_sheet(users: &[SeedUser], options: &SeedOptions, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut rows: Vec<(String, EvaluationRecord)> = Vec::new();
    for (ui, u) in users.iter().enumerate() {
        for year in options.first_year..=options.last_year {
            for term in ["Spring", "Fall"] {
                for &c in &u.courses {
                    let (prefix, number) = COURSES[c];
                    let enrollment: u32 = rng.random_range(15..80);
                    let answered = enrollment * rng.random_range(50..95) / 100;
                    for (qid, text, category) in QUESTIONS {
                        let mut responses = [0u32; 5];
                        for _ in 0..answered {
                            let r = (u.quality + rng.random_range(-1.6..1.6)).round().clamp(1.0, 5.0);
                            responses[r as usize - 1] += 1;
                        }
                        rows.push((
                            u.profile.email.clone(),
                            EvaluationRecord {
                                instructor: crate::domain::InstructorRef::User(UserId::default()),
                                course_key: crate::domain::CourseKey {
                                    prefix: prefix.into(),
                                    number: number.into(),
                                    section: format!("{:03}", ui + 1),
                                    term: term.parse().expect("static term"),
                                    year,
                                },
                                question_id: qid.into(),
                                question_text: text.into(),
                                question_category: category.parse().expect("static category"),
                                responses,
                                enrollment: Some(enrollment),
                            },
                        ));
                    }
                }
            }
        }
    }
    write_canonical_csv(rows.iter().map(|(e, r)| (e.as_str(), r)))
}

impl Platform {
    /// Creates the planned accounts and research items. Evaluations are
    /// committed too when `with_evaluations` is set; otherwise the sheet is
    /// left for a chair to upload.
    pub fn seed_department(&self, plan: &SeedPlan, with_evaluations: bool) -> Result<SeedOutcome> {
        let hash = hash_credential(&plan.options.password)?;
        let mut users = Vec::new();
        for u in &plan.users {
            let account = UserAccount::new(
                u.profile.clone(),
                plan.options.department.clone(),
                Credential::Password(hash.clone()),
            );
            self.store.create_account(&account, None)?;
            users.push(account);
        }
        let owner = |email: &str| users.iter().find(|u| u.email == email).map(|u| u.user_id);
        for r in &plan.research {
            let owner_id = owner(&r.owner_email).expect("research owners are planned users");
            let item = validate_research_item(r.kind, &r.fields, owner_id)?;
            self.store.insert_research_item(&item)?;
        }
        let mut evaluations = 0;
        if with_evaluations {
            let report = parse_eval_workbook(&plan.evaluations_csv, WorkbookFormat::Csv, &owner)?;
            evaluations = self.store.upsert_evaluations(&report.accepted)?.inserted;
        }
        Ok(SeedOutcome {
            users,
            research_items: plan.research.len(),
            evaluations,
        })
    }
}
