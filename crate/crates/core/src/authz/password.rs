use std::sync::OnceLock;

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use rand::RngCore;

use crate::error::{Error, Result};

pub const MIN_PASSWORD_LEN: usize = 10;

pub fn check_strength(plaintext: &str) -> Result<()> {
    if plaintext.chars().count() < MIN_PASSWORD_LEN {
        return Err(Error::WeakPassword {
            min: MIN_PASSWORD_LEN,
        });
    }
    Ok(())
}

/// Argon2id with a fresh random salt, PHC string encoded.
pub fn hash_credential(plaintext: &str) -> Result<String> {
    check_strength(plaintext)?;
    let mut salt_bytes = [0u8; 16];
    rand::rng().fill_bytes(&mut salt_bytes);
    let salt = SaltString::encode_b64(&salt_bytes).map_err(|e| Error::Schema(e.to_string()))?;
    Argon2::default()
        .hash_password(plaintext.as_bytes(), &salt)
        .map(|h| h.to_string())
        .map_err(|e| Error::Schema(format!("password hashing failed: {e}")))
}

pub fn verify_credential(plaintext: &str, hash: &str) -> bool {
    PasswordHash::new(hash)
        .map(|parsed| {
            Argon2::default()
                .verify_password(plaintext.as_bytes(), &parsed)
                .is_ok()
        })
        .unwrap_or(false)
}

/// Burns the same work as a real verification so that unknown accounts
/// cannot be told apart from wrong passwords by timing.
pub(crate) fn verify_against_dummy(plaintext: &str) {
    static DUMMY: OnceLock<String> = OnceLock::new();
    let hash = DUMMY.get_or_init(|| hash_credential("dummy-password-never-matches").unwrap());
    let _ = verify_credential(plaintext, hash);
}
