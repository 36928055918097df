use thiserror::Error;

/// Errors raised by the symbolic and numerical layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Number of torus variables disagrees between two operands.
    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Matrix shapes are not conformable for the requested operation.
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch { op: &'static str, lhs: (usize, usize), rhs: (usize, usize) },

    /// A precondition on the mathematical object is violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Chain condition d∘d = 0 fails.
    #[error("chain condition violated at degree {degree}: max residual {residual:e}")]
    ChainCondition { degree: usize, residual: f64 },

    /// Degree index outside the complex.
    #[error("degree {degree} out of range 0..={top}")]
    DegreeOutOfRange { degree: usize, top: usize },

    /// Log-log regression could not be carried out.
    #[error("fit error: {0}")]
    Fit(String),

    /// Malformed input file or JSON document.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
