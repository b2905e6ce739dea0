use std::sync::{Arc, Mutex};

use tracing::{info, warn};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutboundMail {
    pub to: String,
    pub subject: String,
    pub body: String,
}

/// Outbound mail contract. Production binds SMTP; tests bind [`MemoryMailer`].
pub trait Mailer: Send + Sync {
    fn send(&self, mail: &OutboundMail) -> Result<(), String>;
}

/// Collects messages in memory.
#[derive(Debug, Clone, Default)]
pub struct MemoryMailer(Arc<Mutex<Vec<OutboundMail>>>);

impl MemoryMailer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn messages(&self) -> Vec<OutboundMail> {
        self.0.lock().unwrap().clone()
    }

    pub fn messages_to(&self, to: &str) -> Vec<OutboundMail> {
        self.messages().into_iter().filter(|m| m.to == to).collect()
    }
}

impl Mailer for MemoryMailer {
    fn send(&self, mail: &OutboundMail) -> Result<(), String> {
        self.0.lock().unwrap().push(mail.clone());
        Ok(())
    }
}

/// Writes messages to the log. For local development without SMTP.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogMailer;

impl Mailer for LogMailer {
    fn send(&self, mail: &OutboundMail) -> Result<(), String> {
        warn!("no SMTP_URL configured; logging outbound mail instead of sending it");
        info!(to = %mail.to, subject = %mail.subject, body = %mail.body, "outbound mail");
        Ok(())
    }
}
