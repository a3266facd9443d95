//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Array shapes or sizes are inconsistent with the operation's contract.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter lies outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A matrix that must be (row- or column-)orthonormal is not.
    #[error("orthonormality violated: {0}")]
    NotOrthonormal(String),

    /// An iterative linear solver did not reach the requested tolerance.
    #[error("{context}: no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    SolverNoConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// The eigensolver did not converge to the requested residual.
    #[error("eigensolver: residual {residual:.3e} after {iterations} iterations exceeds tolerance")]
    EigenNoConvergence { residual: f64, iterations: usize },

    /// A matrix required to be invertible is numerically singular.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// Malformed or unsupported PGM data.
    #[error("pgm {path}: {reason}")]
    Pgm { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
