use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ids::{DepartmentId, UserId};
use crate::error::FieldError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Chair,
    Faculty,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Chair => "chair",
            Role::Faculty => "faculty",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chair" => Ok(Role::Chair),
            "faculty" => Ok(Role::Faculty),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// Either a password hash or the marker for an invite not yet redeemed.
#[derive(Clone, PartialEq, Eq)]
pub enum Credential {
    Password(String),
    PendingInvite,
}

impl Credential {
    pub fn is_pending(&self) -> bool {
        matches!(self, Credential::PendingInvite)
    }
}

// Keeps hashes out of logs.
impl fmt::Debug for Credential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Credential::Password(_) => f.write_str("Password(..)"),
            Credential::PendingInvite => f.write_str("PendingInvite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRef {
    pub content_type: String,
    pub byte_len: u64,
}

/// The editable, non-secret part of an account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub email: String,
    pub first_name: String,
    pub last_name: String,
    pub role: Role,
}

impl UserProfile {
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let email = self.email.trim();
        let well_formed = email
            .split_once('@')
            .is_some_and(|(local, domain)| !local.is_empty() && domain.contains('.'))
            && !email.chars().any(char::is_whitespace);
        if !well_formed {
            errors.push(FieldError::new("email", "email address is malformed"));
        }
        if self.first_name.trim().is_empty() {
            errors.push(FieldError::new("first_name", "first name is required"));
        }
        if self.last_name.trim().is_empty() {
            errors.push(FieldError::new("last_name", "last name is required"));
        }
        errors
    }
}

/// A stored account. Deliberately not `Serialize`: read paths go through
/// [`UserView`], which has no credential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserAccount {
    pub user_id: UserId,
    pub email: String,
    pub first_name: String,
    pub last_name: String,
    pub role: Role,
    pub department_id: DepartmentId,
    pub credential: Credential,
    pub profile_image: Option<ImageRef>,
}

impl UserAccount {
    pub fn new(profile: UserProfile, department_id: DepartmentId, credential: Credential) -> Self {
        Self {
            user_id: UserId::new(),
            email: normalize_email(&profile.email),
            first_name: profile.first_name.trim().to_string(),
            last_name: profile.last_name.trim().to_string(),
            role: profile.role,
            department_id,
            credential,
            profile_image: None,
        }
    }

    pub fn full_name(&self) -> String {
        format!("{} {}", self.first_name, self.last_name)
    }

    pub fn profile(&self) -> UserProfile {
        UserProfile {
            email: self.email.clone(),
            first_name: self.first_name.clone(),
            last_name: self.last_name.clone(),
            role: self.role,
        }
    }

    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errors = self.profile().validate();
        if self.email != normalize_email(&self.email) {
            errors.push(FieldError::new("email", "email must be stored lowercase"));
        }
        if self.department_id.as_str().trim().is_empty() {
            errors.push(FieldError::new("department_id", "department is required"));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub fn view(&self) -> UserView {
        UserView {
            user_id: self.user_id,
            email: self.email.clone(),
            first_name: self.first_name.clone(),
            last_name: self.last_name.clone(),
            role: self.role,
            department_id: self.department_id.clone(),
            status: if self.credential.is_pending() {
                AccountStatus::Pending
            } else {
                AccountStatus::Active
            },
            profile_image: self.profile_image.clone(),
        }
    }
}

pub fn normalize_email(email: &str) -> String {
    email.trim().to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccountStatus {
    Active,
    Pending,
}

/// Read-side projection of an account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserView {
    pub user_id: UserId,
    pub email: String,
    pub first_name: String,
    pub last_name: String,
    pub role: Role,
    pub department_id: DepartmentId,
    pub status: AccountStatus,
    pub profile_image: Option<ImageRef>,
}

/// Single-use credential-setup secret mailed to a new account.
#[derive(Clone, PartialEq, Eq)]
pub struct InviteToken {
    pub token: String,
    pub user_id: UserId,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub consumed: bool,
}

impl fmt::Debug for InviteToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InviteToken")
            .field("user_id", &self.user_id)
            .field("issued_at", &self.issued_at)
            .field("expires_at", &self.expires_at)
            .field("consumed", &self.consumed)
            .finish_non_exhaustive()
    }
}
