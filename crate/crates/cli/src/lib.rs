//! File formats, run configuration and commands for the `blaschke` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod verify;

pub use config::{Format, Overrides, RunConfig};
pub use error::{CliError, ConfigError, ExitStatus};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "BLASCHKE_THREADS";
