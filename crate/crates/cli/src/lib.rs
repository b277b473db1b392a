//! Command-line front end: environment inspection, training runs, the
//! evaluation protocol and the throughput benchmark.

pub mod commands;
pub mod config;
pub mod error;

pub use config::CliConfig;
pub use error::CliError;
