use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// A well-formed expression that cannot be bound to the requested ball
    /// (coordinate out of range, `r_j` without a partition, ...).
    #[error("symbol error at line {line}, column {column}: {message}")]
    Binding {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("symbol evaluates to a non-finite value at {point:?}")]
    NonFinite { point: Vec<Complex64> },

    #[error("level {rho:?} is not invariant: off-block mass {mass:e} exceeds {tolerance:e}")]
    InvarianceViolation {
        rho: Vec<u32>,
        mass: f64,
        tolerance: f64,
    },

    #[error("operator is not Fredholm: |det| = {value:e} at {location:?}")]
    NotFredholm { location: Vec<Complex64>, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
