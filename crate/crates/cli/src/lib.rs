//! File formats, session store and command-line driver for the
//! reading-difficulty support pipeline.

pub mod archive;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod fsio;
pub mod manifest;
pub mod registry;
pub mod sessions;
pub mod survey_file;

pub use error::{Category, CliError, Result};
