use std::sync::Arc;

use chrono::Duration;

use crate::clock::{Clock, SystemClock};
use crate::mail::{LogMailer, Mailer};
use crate::store::Store;

#[derive(Debug, Clone)]
pub struct Settings {
    /// Public origin used in links sent by email, without trailing slash.
    pub base_url: String,
    /// Smallest cohort for which a peer distribution is disclosed.
    pub cohort_min: usize,
    pub session_ttl: Duration,
    pub invite_ttl: Duration,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            base_url: "http://localhost:8080".into(),
            cohort_min: 4,
            session_ttl: Duration::hours(24),
            invite_ttl: Duration::hours(72),
        }
    }
}

/// The store plus the injected collaborators every operation needs.
pub struct Platform {
    pub(crate) store: Store,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) mailer: Arc<dyn Mailer>,
    pub(crate) settings: Settings,
}

impl Platform {
    pub fn new(store: Store, settings: Settings) -> Self {
        Self {
            store,
            clock: Arc::new(SystemClock),
            mailer: Arc::new(LogMailer),
            settings,
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_mailer(mut self, mailer: Arc<dyn Mailer>) -> Self {
        self.mailer = mailer;
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }
}
