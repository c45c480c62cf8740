//! Command-line front end, file formats and parallel study drivers for
//! `semidec-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{Check, Report};
pub use config::{Layer, RunConfig};
pub use error::{exit, CliError, CliResult};
