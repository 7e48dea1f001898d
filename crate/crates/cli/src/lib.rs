//! Command-line frontend: state files, spec strings, subcommands and the
//! Haar Monte Carlo harness.

pub mod commands;
pub mod experiment;
pub mod io;
pub mod spec;

pub use commands::{run, Record, EXIT_NUMERIC, EXIT_PARSE, EXIT_USAGE};
