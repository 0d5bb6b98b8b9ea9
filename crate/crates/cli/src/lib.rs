//! Command-line front end for `bdk-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod grammar;

pub use error::CliError;
