//! Core of the faculty dashboard: records, storage, access control,
//! spreadsheet ingestion and the statistics behind the analytics pages.

pub mod analytics;
pub mod authz;
pub mod clock;
pub mod domain;
mod error;
pub mod ingest;
pub mod mail;
mod platform;
pub mod seed;
pub mod store;

pub use error::{Error, FieldError, Result, StatsError};
pub use platform::{Platform, Settings};
