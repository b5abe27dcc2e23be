use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet size mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Every per-symbol median is zero, so the median estimate cannot be normalized.
    #[error("degenerate median estimate: all per-symbol medians are zero")]
    DegenerateMedian,

    #[error("GLRT refused: C({m}, {t}) = {subsets} subsets exceeds the budget of {budget}")]
    BudgetExceeded {
        m: usize,
        t: usize,
        subsets: String,
        budget: u64,
    },

    #[error("no feasible grid pair for the constrained exponent")]
    NoFeasiblePair,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
