//! Command-line front end: configuration files, CSV tables, command
//! dispatch, and the validation suite.

// Parameter tweaks use mutate-after-default throughout.
#![allow(clippy::field_reassign_with_default)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod table;

pub use commands::{dispatch, AuditOptions, Command};
pub use config::RunConfig;
pub use table::ResultTable;
