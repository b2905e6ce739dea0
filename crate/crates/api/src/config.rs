use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Args;

/// Service settings, read from flags or the environment.
#[derive(Debug, Clone, Args)]
pub struct Config {
    /// Public origin of the UI, used in emailed links.
    #[arg(long, env = "BASE_URL", default_value = "http://localhost:8080")]
    pub base_url: String,

    #[arg(long, env = "DB_URL", default_value = "sqlite://facdash.db")]
    pub db_url: String,

    /// Without it, outbound mail is written to the log.
    #[arg(long, env = "SMTP_URL")]
    pub smtp_url: Option<String>,

    #[arg(long, env = "SMTP_FROM", default_value = "Faculty Dashboard <no-reply@localhost>")]
    pub smtp_from: String,

    /// Smallest peer group whose distribution may be shown.
    #[arg(long, env = "COHORT_MIN", default_value_t = 4)]
    pub cohort_min: usize,

    #[arg(long, env = "MAX_UPLOAD_BYTES", default_value_t = 10 * 1024 * 1024)]
    pub max_upload_bytes: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ServeConfig {
    #[arg(long, env = "BIND_ADDR", default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,

    /// Built UI to serve next to the API.
    #[arg(long, env = "STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}

impl Config {
    /// Cookies are marked `Secure` whenever the public origin is https.
    pub fn secure_cookies(&self) -> bool {
        self.base_url.starts_with("https://")
    }
}
