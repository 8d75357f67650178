//! Crate-wide error type with process exit-code mapping for the CLI.

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters, detected before any computation starts.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A norm table would exceed the configured memory cap.
    #[error("norm table capacity exceeded: ~{required} items required, cap is {cap}")]
    Capacity { required: usize, cap: usize },

    /// A query outside the range covered by a table.
    #[error("range error: {0}")]
    Range(String),

    /// Evaluation point too close to a spectral pole.
    #[error("lambda = {lambda} is within the pole guard of norm {norm}")]
    Pole { lambda: f64, norm: f64 },

    /// No sign change found at the minimal bracket offset; the root is
    /// closer to an interval endpoint than double precision can resolve.
    #[error("bracket failure in ({lower}, {upper}): no sign change at minimal offset")]
    BracketFailure { lower: f64, upper: f64 },

    /// A proposed eigenvalue escapes its interlacing interval.
    #[error("interlacing violation at index {index}: {lambda} not strictly inside ({lower}, {upper})")]
    Interlacing {
        index: usize,
        lambda: f64,
        lower: f64,
        upper: f64,
    },

    /// Any other numerical failure (non-convergence, tail bound too large, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract: 0 success, 2 config error, 3 numerical failure,
    /// 4 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Range(_) => 2,
            Error::Capacity { .. } => 4,
            Error::Pole { .. }
            | Error::BracketFailure { .. }
            | Error::Interlacing { .. }
            | Error::Numerical(_) => 3,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
