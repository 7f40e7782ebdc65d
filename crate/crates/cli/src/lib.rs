//! Command-line front end: flat TOML configs in, CSV tables out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{cmd_optimize, cmd_rate, cmd_scan, cmd_verify, run, Command};
pub use config::{Overrides, RunConfig};
pub use error::CliError;
pub use table::{render, CsvRow, HEADER};
