//! Authentication, sessions, the access matrix and account provisioning.

mod matrix;
mod password;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Utc};
use rand::RngCore;
use tracing::info;

pub use matrix::{decide, AccessDecision, Action, DenialReason, SubjectScope};
pub use password::{check_strength, hash_credential, verify_credential, MIN_PASSWORD_LEN};

use crate::domain::{
    Credential, DeletionReport, DepartmentId, InviteToken, Role, UserAccount, UserId, UserProfile,
};
use crate::error::{Error, FieldError, Result};
use crate::mail::OutboundMail;
use crate::platform::Platform;

/// A login session. The id doubles as the cookie value.
#[derive(Clone, PartialEq, Eq)]
pub struct Session {
    pub session_id: String,
    pub user_id: UserId,
    /// Echoed back in a header on mutating requests.
    pub csrf_token: String,
    pub created_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("user_id", &self.user_id)
            .field("created_at", &self.created_at)
            .field("expires_at", &self.expires_at)
            .finish_non_exhaustive()
    }
}

/// An authenticated caller, resolved from a live session.
#[derive(Debug, Clone)]
pub struct Principal {
    pub user_id: UserId,
    pub role: Role,
    pub department_id: DepartmentId,
    pub session_id: String,
    pub csrf_token: String,
}

impl Principal {
    pub fn is_chair(&self) -> bool {
        self.role == Role::Chair
    }
}

/// 256 random bits, URL-safe base64 without padding (43 characters).
pub fn random_token() -> String {
    let mut bytes = [0u8; 32];
    rand::rng().fill_bytes(&mut bytes);
    URL_SAFE_NO_PAD.encode(bytes)
}

#[derive(Debug, Clone)]
pub enum CreationMode {
    /// The chair sets the initial password.
    Manual { password: String },
    /// The new user receives an emailed link to set their own.
    Invite,
}

#[derive(Debug, Clone)]
pub struct CreatedUser {
    pub user: UserAccount,
    pub invite: Option<InviteToken>,
}

impl Platform {
    pub fn login(&self, email: &str, plaintext: &str) -> Result<(Session, UserAccount)> {
        let Some(user) = self.store.user_by_email(email)? else {
            password::verify_against_dummy(plaintext);
            return Err(Error::InvalidCredentials);
        };
        let hash = match &user.credential {
            Credential::Password(hash) => hash,
            Credential::PendingInvite => return Err(Error::AccountPending),
        };
        if !verify_credential(plaintext, hash) {
            return Err(Error::InvalidCredentials);
        }
        let now = self.clock.now();
        let session = Session {
            session_id: random_token(),
            user_id: user.user_id,
            csrf_token: random_token(),
            created_at: now,
            expires_at: now + self.settings.session_ttl,
        };
        self.store.insert_session(&session)?;
        info!(user = %user.user_id, "login");
        Ok((session, user))
    }

    pub fn logout(&self, session_id: &str) -> Result<()> {
        self.store.delete_session(session_id)?;
        Ok(())
    }

    /// Resolves a session id to its caller. Missing, expired and revoked
    /// sessions all yield `NotAuthenticated`.
    pub fn authenticate(&self, session_id: &str) -> Result<Principal> {
        let session = self
            .store
            .session(session_id)?
            .ok_or(Error::NotAuthenticated)?;
        if self.clock.now() >= session.expires_at {
            self.store.delete_session(session_id)?;
            return Err(Error::NotAuthenticated);
        }
        let user = self
            .store
            .user(session.user_id)?
            .ok_or(Error::NotAuthenticated)?;
        Ok(Principal {
            user_id: user.user_id,
            role: user.role,
            department_id: user.department_id,
            session_id: session.session_id,
            csrf_token: session.csrf_token,
        })
    }

    fn subject_scope(&self, caller: &Principal, subject: Option<UserId>) -> Result<SubjectScope> {
        let Some(subject) = subject else {
            return Ok(SubjectScope::Absent);
        };
        if subject == caller.user_id {
            return Ok(SubjectScope::Caller);
        }
        let Some(account) = self.store.user(subject)? else {
            return Ok(SubjectScope::Outside);
        };
        Ok(SubjectScope::classify(
            caller.user_id,
            &caller.department_id,
            Some((account.user_id, &account.department_id)),
        ))
    }

    /// Full decision for a raw session id, as handlers see it.
    pub fn authorize(
        &self,
        session_id: Option<&str>,
        action: Action,
        subject: Option<UserId>,
    ) -> Result<AccessDecision> {
        let principal = match session_id.map(|s| self.authenticate(s)) {
            None | Some(Err(Error::NotAuthenticated)) => None,
            Some(Err(e)) => return Err(e),
            Some(Ok(p)) => Some(p),
        };
        let Some(principal) = principal else {
            return Ok(decide(None, action, SubjectScope::Absent));
        };
        let scope = self.subject_scope(&principal, subject)?;
        Ok(decide(Some(principal.role), action, scope))
    }

    /// Checks `action` for an already-authenticated caller.
    pub fn require(&self, caller: &Principal, action: Action, subject: Option<UserId>) -> Result<()> {
        let scope = self.subject_scope(caller, subject)?;
        decide(Some(caller.role), action, scope).into_result()
    }

    pub fn create_user(
        &self,
        caller: &Principal,
        profile: UserProfile,
        mode: CreationMode,
    ) -> Result<CreatedUser> {
        self.require(caller, Action::ManageUsers, None)?;
        let errors = profile.validate();
        if !errors.is_empty() {
            return Err(Error::InvariantViolation(errors));
        }
        let department = caller.department_id.clone();
        match mode {
            CreationMode::Manual { password } => {
                let hash = hash_credential(&password)?;
                let user = UserAccount::new(profile, department, Credential::Password(hash));
                self.store.create_account(&user, None)?;
                info!(user = %user.user_id, by = %caller.user_id, "created user manually");
                Ok(CreatedUser { user, invite: None })
            }
            CreationMode::Invite => {
                let user = UserAccount::new(profile, department, Credential::PendingInvite);
                let now = self.clock.now();
                let invite = InviteToken {
                    token: random_token(),
                    user_id: user.user_id,
                    issued_at: now,
                    expires_at: now + self.settings.invite_ttl,
                    consumed: false,
                };
                self.store.create_account(&user, Some(&invite))?;
                if let Err(e) = self.mailer.send(&self.invite_mail(&user, &invite)) {
                    // Without the mail the account could never be activated.
                    self.store.delete_user_cascade(user.user_id)?;
                    return Err(Error::Mail(e));
                }
                info!(user = %user.user_id, by = %caller.user_id, "invited user");
                Ok(CreatedUser {
                    user,
                    invite: Some(invite),
                })
            }
        }
    }

    pub fn invite_link(&self, token: &str) -> String {
        format!(
            "{}/set-password?token={token}",
            self.settings.base_url.trim_end_matches('/')
        )
    }

    fn invite_mail(&self, user: &UserAccount, invite: &InviteToken) -> OutboundMail {
        let hours = self.settings.invite_ttl.num_hours();
        OutboundMail {
            to: user.email.clone(),
            subject: "Your Faculty Dashboard account".into(),
            body: format!(
                "Hello {},\n\n\
                 An account has been created for you on the Faculty Dashboard.\n\
                 Choose your password here:\n\n{}\n\n\
                 The link can be used once and expires in {hours} hours.\n",
                user.first_name,
                self.invite_link(&invite.token)
            ),
        }
    }

    pub fn redeem_invite(&self, token: &str, new_password: &str) -> Result<UserAccount> {
        let hash = hash_credential(new_password)?;
        let user = self.store.redeem_invite(token, self.clock.now(), &hash)?;
        info!(user = %user.user_id, "invite redeemed");
        Ok(user)
    }

    /// Replaces the caller's password and revokes all their other sessions.
    pub fn change_password(&self, caller: &Principal, old: &str, new: &str) -> Result<()> {
        self.require(caller, Action::ManageOwnAccount, None)?;
        let user = self.store.user(caller.user_id)?.ok_or(Error::NotAuthenticated)?;
        let Credential::Password(current) = &user.credential else {
            return Err(Error::InvalidCredentials);
        };
        if !verify_credential(old, current) {
            return Err(Error::InvalidCredentials);
        }
        let new_hash = hash_credential(new)?;
        if !self.store.swap_password(caller.user_id, current, &new_hash)? {
            // Someone else changed it between our read and write.
            return Err(Error::InvalidCredentials);
        }
        let revoked = self
            .store
            .revoke_sessions(caller.user_id, Some(&caller.session_id))?;
        info!(user = %caller.user_id, revoked, "password changed");
        Ok(())
    }

    pub fn list_users(&self, caller: &Principal) -> Result<Vec<UserAccount>> {
        self.require(caller, Action::ManageUsers, None)?;
        self.store.department_users(&caller.department_id)
    }

    pub fn update_user(
        &self,
        caller: &Principal,
        subject: UserId,
        profile: UserProfile,
    ) -> Result<UserAccount> {
        self.require(caller, Action::ManageUsers, Some(subject))?;
        self.store.update_profile(subject, &profile)
    }

    pub fn delete_user(&self, caller: &Principal, subject: UserId) -> Result<DeletionReport> {
        self.require(caller, Action::ManageUsers, Some(subject))?;
        self.store.delete_user_cascade(subject)
    }

    /// Account-settings deletion: removes the caller's own account and data.
    pub fn delete_own_data(&self, caller: &Principal) -> Result<DeletionReport> {
        self.require(caller, Action::ManageOwnAccount, None)?;
        self.store.delete_user_cascade(caller.user_id)
    }

    pub fn me(&self, caller: &Principal) -> Result<UserAccount> {
        self.store.user(caller.user_id)?.ok_or(Error::NotAuthenticated)
    }

    pub fn set_profile_image(&self, caller: &Principal, content_type: &str, bytes: &[u8]) -> Result<()> {
        self.require(caller, Action::ManageOwnAccount, None)?;
        if bytes.is_empty() {
            return Err(Error::FieldErrors(vec![FieldError::new("photo", "image is empty")]));
        }
        self.store.set_profile_image(caller.user_id, content_type, bytes)
    }

    pub fn profile_image(&self, caller: &Principal) -> Result<(String, Vec<u8>)> {
        self.store
            .profile_image(caller.user_id)?
            .ok_or(Error::NotFound)
    }
}
