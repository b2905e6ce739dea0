#![allow(dead_code)]

use std::collections::BTreeMap;

use facdash_core::domain::{
    CourseKey, Credential, DepartmentId, EvaluationRecord, InstructorRef, QuestionCategory,
    ResearchDetails, ResearchItem, Role, Term, UserAccount, UserId, UserProfile,
};
use facdash_core::store::Store;

pub fn account(email: &str, first: &str, last: &str, role: Role, dept: &str) -> UserAccount {
    UserAccount::new(
        UserProfile {
            email: email.into(),
            first_name: first.into(),
            last_name: last.into(),
            role,
        },
        DepartmentId::new(dept),
        Credential::PendingInvite,
    )
}

pub fn stored_account(store: &Store, email: &str, role: Role) -> UserAccount {
    let local = email.split('@').next().unwrap();
    let user = account(email, "Test", &format!("User{local}"), role, "cse");
    store.create_account(&user, None).unwrap();
    user
}

pub fn key(prefix: &str, number: &str, section: &str, term: Term, year: i32) -> CourseKey {
    CourseKey {
        prefix: prefix.into(),
        number: number.into(),
        section: section.into(),
        term,
        year,
    }
}

pub fn eval(
    instructor: UserId,
    course_key: CourseKey,
    question_id: &str,
    category: QuestionCategory,
    responses: [u32; 5],
) -> EvaluationRecord {
    EvaluationRecord {
        instructor: InstructorRef::User(instructor),
        course_key,
        question_id: question_id.into(),
        question_text: format!("Question {question_id}"),
        question_category: category,
        responses,
        enrollment: None,
    }
}

pub fn grant(owner: UserId, title: &str, cents: u64, start: &str, end: &str) -> ResearchItem {
    ResearchItem::new(
        owner,
        ResearchDetails::Grant {
            title: title.into(),
            funding_agency: "NSF".into(),
            amount: facdash_core::domain::Cents(cents),
            start_date: start.parse().unwrap(),
            end_date: end.parse().unwrap(),
        },
    )
}

pub fn publication(owner: UserId, title: &str, year: i32) -> ResearchItem {
    ResearchItem::new(
        owner,
        ResearchDetails::Publication {
            title: title.into(),
            venue: "ICSE".into(),
            publication_year: year,
            author_list: "A. Author".into(),
        },
    )
}

pub fn form(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

pub fn principal(user: &UserAccount) -> facdash_core::authz::Principal {
    facdash_core::authz::Principal {
        user_id: user.user_id,
        role: user.role,
        department_id: user.department_id.clone(),
        session_id: "test-session".into(),
        csrf_token: "test-csrf".into(),
    }
}
