//! Crate-wide error type.

use std::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the documented domain of an operation.
    Domain(String),
    /// An iterative method failed to converge within its budget.
    Convergence { what: String, terms: usize },
    /// A linear system was too ill-conditioned to solve reliably.
    Conditioning { what: String, estimate: f64 },
    /// A supplied SIC decoding order violates the required power ordering.
    OrderingViolation(String),
    /// An evaluation budget would be exceeded; carries the required budget.
    BudgetExceeded { required: u64, allowed: u64 },
    /// Vector/matrix dimensions do not line up.
    ShapeMismatch(String),
    /// A configuration is structurally invalid.
    InvalidConfig(String),
    /// A non-finite value surfaced where a finite one is required.
    NonFinite(String),
    /// Parsing a serialized record failed.
    Parse(String),
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Convergence { what, terms } => {
                write!(f, "{what} failed to converge after {terms} terms")
            }
            Error::Conditioning { what, estimate } => {
                write!(f, "{what}: condition estimate {estimate:.3e} exceeds limit")
            }
            Error::OrderingViolation(msg) => write!(f, "SIC ordering violation: {msg}"),
            Error::BudgetExceeded { required, allowed } => {
                write!(f, "evaluation budget exceeded: need {required}, allowed {allowed}")
            }
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid config: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
