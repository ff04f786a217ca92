use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("operator has unit trace requirement violated (trace {0})")]
    NotNormalized(f64),

    /// The operand has weight on the joint kernel of the reference operator.
    #[error("operand is not contained in the range of the reference operator")]
    Range,

    #[error("operator is not block diagonal (largest off-block entry {0:e})")]
    NotBlockDiagonal(f64),

    #[error("{0} exceeds the supported size")]
    TooLarge(String),

    #[error("semidefinite solver: {0}")]
    Solver(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
