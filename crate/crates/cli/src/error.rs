//! Harness-level errors and their process exit codes.
//!
//! Every failure surfaces as one of two kinds: the configuration (or a
//! derived plan) is invalid, or the filesystem refused. The distinction is
//! part of the CLI contract: validation problems exit with 1, I/O problems
//! with 2.

use std::fmt;
use std::io;
use std::path::Path;

use driftweight_core::CoreError;

/// One failure of a harness command.
#[derive(Debug)]
pub enum CliError {
    /// The config, flags, or data fail a semantic check. Exit code 1.
    Validation(String),
    /// A file or directory could not be read, written, or parsed. Exit code 2.
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    /// Wrap an I/O error with the path it concerned.
    pub fn io_at(path: &Path, err: io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            // A snapshot or report that fails to parse is a damaged artifact,
            // not a bad config.
            CoreError::Parse(msg) => CliError::Io(format!("artifact parse failure: {msg}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_contract() {
        assert_eq!(CliError::validation("x").exit_code(), 1);
        assert_eq!(CliError::io("x").exit_code(), 2);
    }

    #[test]
    fn core_parse_errors_count_as_io() {
        let e: CliError = CoreError::Parse("bad header".into()).into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = CoreError::Degenerate("empty").into();
        assert_eq!(e.exit_code(), 1);
    }
}
