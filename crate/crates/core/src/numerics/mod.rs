//! Dense complex linear algebra used by the rest of the crate.

mod eigen;
mod gram_schmidt;
mod matrix;
mod qr;

pub use eigen::{hermitian_eigenvalues, hermitian_eigs, HermitianEigen, HERMITIAN_TOL};
pub use gram_schmidt::gram_schmidt_hs;
pub use matrix::ComplexMatrix;
pub use qr::{nullspace, rank_via_qr, PivotedQr, StackedRowCompressor, DEFAULT_RANK_TOL};

pub(crate) use matrix::{ONE, ZERO};

/// Alias kept for callers that prefer the longer name.
pub type HermitianEigenResult = HermitianEigen;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}
