//! File formats, configuration and commands for the `caviar` CLI.

pub mod commands;
pub mod config;
pub mod dataset;
mod error;
pub mod trace;

pub use error::CliError;
