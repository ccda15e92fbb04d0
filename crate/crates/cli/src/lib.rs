//! Experiment harness for the time-indexed importance-weight estimator.
//!
//! The library half of the `driftweight` binary: configuration, CSV and
//! manifest I/O, the protocol benchmark, subcommand implementations, and
//! SVG chart rendering. Everything here is deterministic given the config
//! and master seed, except the wallclock columns in run CSVs.

pub mod bench;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod svg;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
