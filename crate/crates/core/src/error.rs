use thiserror::Error;

/// Errors reported by state validation, entropy/metric evaluation, and the
/// numerical routines (optimizers, integrators, solvers).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M†| element = {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },

    #[error("matrix trace is {trace:?}, expected 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error(
        "state too close to the boundary of state space for a log-based quantity \
         (min eigenvalue = {min_eigenvalue:.3e}, required >= {required:.0e})"
    )]
    BoundaryState { min_eigenvalue: f64, required: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {requested} exceeds the supported cap of {cap}")]
    DimensionTooLarge { requested: usize, cap: usize },

    #[error("Bloch vector has norm {norm} > 1")]
    BlochOutsideBall { norm: f64 },

    #[error("matrix is not a valid tangent direction: {reason}")]
    InvalidTangent { reason: String },

    #[error("probabilities are invalid: {reason}")]
    InvalidDistribution { reason: String },

    #[error("basis columns are not orthonormal (max |G - I| element = {max_dev:.3e})")]
    NotOrthonormal { max_dev: f64 },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("numerical routine failed: {what}")]
    Numerical { what: String },
}

impl Error {
    /// True for failures of a numerical procedure (non-convergence, lost
    /// invariants, bracketing failures) as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }

    pub(crate) fn numerical(what: impl Into<String>) -> Self {
        Error::Numerical { what: what.into() }
    }

    pub(crate) fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter { name, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
