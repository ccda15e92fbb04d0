//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the numeric and simulation layers.
///
/// Every fallible operation in this crate validates its inputs up front and
/// returns one of these variants instead of panicking, so callers (tests,
/// the CLI) can report a precise cause.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Two tensors or batches that must agree in shape do not.
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    /// A scalar argument is outside its documented range.
    OutOfRange {
        context: &'static str,
        value: f64,
    },
    /// An index (time step, action, class) exceeds its domain.
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        limit: usize,
    },
    /// The input collection is empty or too small to define the operation.
    Degenerate(&'static str),
    /// A non-finite value appeared where finite math is required.
    NonFinite(&'static str),
    /// A model was used before it was trained.
    Untrained(&'static str),
    /// A serialized artifact could not be parsed.
    Parse(String),
    /// Configuration values are inconsistent with each other.
    InvalidConfig(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::ShapeMismatch {
                context,
                expected,
                actual,
            } => write!(
                f,
                "{context}: shape mismatch, expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            CoreError::OutOfRange { context, value } => {
                write!(f, "{context}: value {value} out of range")
            }
            CoreError::IndexOutOfRange {
                context,
                index,
                limit,
            } => write!(f, "{context}: index {index} out of range (limit {limit})"),
            CoreError::Degenerate(context) => {
                write!(f, "{context}: input too small or degenerate")
            }
            CoreError::NonFinite(context) => write!(f, "{context}: non-finite value"),
            CoreError::Untrained(context) => {
                write!(f, "{context}: model has not been trained")
            }
            CoreError::Parse(msg) => write!(f, "parse error: {msg}"),
            CoreError::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for CoreError {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;
