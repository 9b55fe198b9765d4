use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Fewer than three distinct points, or all points collinear.
    #[error("degenerate point set: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("infeasible input: {0}")]
    InfeasibleInput(String),

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A solver invariant was breached. Always a bug.
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
