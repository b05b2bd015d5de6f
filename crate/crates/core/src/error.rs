//! Error type shared by every solver entry point.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dual vector leaves the feasible set at sample {index} (value {value})")]
    InfeasibleDual { index: usize, value: f64 },

    #[error("feature index {index} out of range for p = {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("iterates diverged at iteration {iteration} (non-finite objective)")]
    Divergence { iteration: usize },

    #[error("enumeration refused: p = {p} exceeds the cap of {max_p}")]
    TooManyFeatures { p: usize, max_p: usize },

    #[error("invalid synthetic spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
