//! Command-line companion to `cqa-core`: file formats, artifact persistence,
//! configuration, and the five subcommands (ingest, candidates, train,
//! evaluate, answer).

pub mod artifacts;
pub mod commands;
pub mod config;
mod error;
pub mod formats;

pub use error::{CliError, CliResult};
