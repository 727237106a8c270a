use thiserror::Error;

/// Errors produced by the estimators, the asymptotic engine and the
/// verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point failed the simplex constraints.
    #[error("invalid simplex point: {0}")]
    InvalidPoint(String),

    /// The lattice for `(m, d)` would exceed the configured entry limit.
    #[error("lattice for m={m}, d={d} has {count} points, above the limit of {limit}")]
    SizeLimit { m: u64, d: usize, count: u128, limit: u128 },

    /// Dimensions of two objects disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Generic invalid argument (bad order, empty grid, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A precondition of an asymptotic formula does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The query has no closed-form path.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// CSV input rejected, with the 1-based row it came from.
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    /// I/O or parse failure while reading or writing data files.
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
