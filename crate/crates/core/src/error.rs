use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not anti-Hermitian (max |K + K^dagger| = {deviation:e})")]
    NotAntiHermitian { deviation: f64 },

    #[error("operator is not diagonal (offset {offset} is populated)")]
    NotDiagonal { offset: i64 },

    #[error("exponential action did not converge after {steps} steps (residual estimate {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },

    #[error("eigensolver failed to converge for eigenvalue {index}")]
    EigenFailure { index: usize },

    #[error("state not converged: {0}")]
    NotConverged(String),

    #[error("resource budget exceeded: {parameter} = {value} exceeds limit {limit}")]
    Budget {
        parameter: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::EigenFailure { .. } | Error::NotConverged(_) => 2,
            Error::Budget { .. } => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
