//! Experiment runner for the `randiso` library.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suites;

pub use commands::{run, Command};
pub use config::Config;
pub use error::{CliError, Result};
pub use report::{Format, Report};
