//! Command-line front end: config parsing, dispatch, CSV/SVG output and run
//! manifests.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod svg;

pub use cli::{Cli, Command};
pub use commands::run;
pub use error::CliError;
