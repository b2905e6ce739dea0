use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use facdash_api::config::{Config, ServeConfig};
use facdash_api::mailer::SmtpMailer;
use facdash_api::{router, AppState};
use facdash_core::authz::hash_credential;
use facdash_core::domain::{Credential, DepartmentId, Role, UserAccount, UserProfile};
use facdash_core::seed::{plan_department, SeedOptions};
use facdash_core::store::Store;
use facdash_core::{Platform, Settings};
use tracing::info;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "facdash", version, about = "Faculty dashboard service")]
struct Cli {
    #[command(flatten)]
    config: Config,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve(ServeConfig),
    /// Apply database migrations and exit.
    Migrate,
    /// Create a demo department: one chair and N faculty.
    Seed {
        #[arg(long, default_value_t = 6)]
        faculty: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "cse")]
        department: String,
        /// Store the synthetic evaluations directly instead of leaving them for upload.
        #[arg(long)]
        with_evaluations: bool,
        /// Also write the synthetic evaluation sheet here.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Create the first chair account of a department.
    CreateChair {
        #[arg(long)]
        email: String,
        #[arg(long)]
        first_name: String,
        #[arg(long)]
        last_name: String,
        #[arg(long)]
        department: String,
        #[arg(long, env = "CHAIR_PASSWORD", hide_env_values = true)]
        password: String,
    },
}

fn platform(config: &Config) -> Result<Platform, String> {
    let store = Store::open(&config.db_url).map_err(|e| format!("cannot open {}: {e}", config.db_url))?;
    let settings = Settings {
        base_url: config.base_url.clone(),
        cohort_min: config.cohort_min,
        ..Settings::default()
    };
    let mut platform = Platform::new(store, settings);
    if let Some(url) = &config.smtp_url {
        platform = platform.with_mailer(Arc::new(SmtpMailer::new(url, &config.smtp_from)?));
    }
    Ok(platform)
}

async fn serve(config: Config, serve: ServeConfig) -> Result<(), String> {
    let state = AppState {
        platform: Arc::new(platform(&config)?),
        max_upload_bytes: config.max_upload_bytes,
        secure_cookies: config.secure_cookies(),
    };
    let app = router(state, serve.static_dir);
    let listener = tokio::net::TcpListener::bind(serve.bind)
        .await
        .map_err(|e| format!("cannot bind {}: {e}", serve.bind))?;
    info!(addr = %serve.bind, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Serve(serve_config) => tokio::runtime::Runtime::new()
            .map_err(|e| e.to_string())?
            .block_on(serve(cli.config, serve_config)),
        Command::Migrate => {
            platform(&cli.config)?;
            println!("database at {} is up to date", cli.config.db_url);
            Ok(())
        }
        Command::Seed {
            faculty,
            seed,
            department,
            with_evaluations,
            csv_out,
        } => {
            let options = SeedOptions {
                seed,
                faculty,
                department: DepartmentId::new(department),
                ..SeedOptions::default()
            };
            let plan = plan_department(&options);
            let outcome = platform(&cli.config)?
                .seed_department(&plan, with_evaluations)
                .map_err(|e| e.to_string())?;
            if let Some(path) = csv_out {
                std::fs::write(&path, &plan.evaluations_csv)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                println!("evaluation sheet written to {}", path.display());
            }
            for user in &outcome.users {
                println!("{:<8} {:<40} {}", user.role.as_str(), user.email, user.full_name());
            }
            println!(
                "{} accounts (password `{}`), {} research items, {} evaluation rows",
                outcome.users.len(),
                options.password,
                outcome.research_items,
                outcome.evaluations
            );
            Ok(())
        }
        Command::CreateChair {
            email,
            first_name,
            last_name,
            department,
            password,
        } => {
            let profile = UserProfile {
                email,
                first_name,
                last_name,
                role: Role::Chair,
            };
            let errors = profile.validate();
            if let Some(e) = errors.first() {
                return Err(format!("{}: {}", e.field, e.message));
            }
            let hash = hash_credential(&password).map_err(|e| e.to_string())?;
            let chair = UserAccount::new(profile, DepartmentId::new(department), Credential::Password(hash));
            platform(&cli.config)?
                .store()
                .create_account(&chair, None)
                .map_err(|e| e.to_string())?;
            println!("created chair {} ({})", chair.email, chair.user_id);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
