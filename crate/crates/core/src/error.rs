use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Squared norm is off from 1 by more than the accepted tolerance.
    #[error("state is not normalized: |norm^2 - 1| = {deficit:e} exceeds {tolerance:e}")]
    Normalization { deficit: f64, tolerance: f64 },

    #[error("normalized measure undefined for n = {n}; needs min(dim_a, dim_b) >= 2")]
    DegenerateDimension { n: usize },

    #[error("operator is not Hermitian: residual {residual:e}")]
    NonHermitian { residual: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("value {value} outside [{lo}, {hi}] beyond rounding slack")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown name `{name}`; known: {known}")]
    UnknownName { name: String, known: String },
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Usage/parse errors map to exit code 2, domain errors to 3.
    pub fn is_domain_error(&self) -> bool {
        !matches!(self, Error::InvalidInput(_) | Error::UnknownName { .. })
    }
}
