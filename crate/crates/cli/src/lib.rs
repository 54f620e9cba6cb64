//! Command-line front end for `enfix`: problem files, reports and batch runs.

pub mod bench;
pub mod commands;
pub mod error;
pub mod problem;
pub mod report;

pub use error::{exit, CliError};
