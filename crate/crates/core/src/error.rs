use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain the operation is defined on.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two refinement levels of a quadrature disagree by more than the tolerance.
    #[error("quadrature did not converge for {context}: coarse = {coarse:e}, refined = {refined:e}")]
    Quadrature {
        context: String,
        coarse: f64,
        refined: f64,
    },

    /// A quantity that must be real came out with a non-negligible imaginary part.
    #[error("imaginary residue {imag:e} exceeds tolerance for {context} (real part {real:e})")]
    ImaginaryResidue { context: String, real: f64, imag: f64 },

    #[error("value {value} outside the valid interval ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The covariance could not be factorized even at the largest jitter.
    #[error("Cholesky factorization failed at maximal jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    /// A mean-square error came out negative beyond the tolerance.
    #[error("negative mean-square error {0:e} (covariance inconsistency)")]
    NegativeMse(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
