//! Small real symmetric linear-algebra kernel.
//!
//! Two storage schemes share one tridiagonal QL core:
//!
//! * [`SymmetricDense`]: full row-major storage, Householder reduction to
//!   tridiagonal form followed by implicit-shift QL ([`eig_symmetric`]).
//! * [`SymmetricBanded`]: lower-band storage for finite-difference operators,
//!   Givens bulge-chasing reduction to tridiagonal form and inverse iteration
//!   for selected eigenvectors.
//!
//! Everything is single-threaded and bit-for-bit deterministic for a fixed
//! input.

mod banded;
mod dense;
mod tridiag;

pub use banded::SymmetricBanded;
pub use dense::{eig_symmetric, matvec, DenseMatrix, EigenDecomposition, SymmetricDense};
pub use tridiag::tridiagonal_eigenvalues;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {deviation:e}")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix dimension must be at least 1")]
    Empty,
    #[error("entry ({row}, {col}) lies outside the stored band of half-width {bandwidth}")]
    OutsideBand { row: usize, col: usize, bandwidth: usize },
    #[error("eigensolver failed to converge for eigenvalue index {index}")]
    ConvergenceFailure { index: usize },
}

/// `sqrt(a^2 + b^2)` without overflow.
///
/// Only `sqrt` is used, which IEEE 754 rounds exactly, so results do not
/// depend on the platform libm.
#[inline]
pub(crate) fn hypot(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == 0.0 {
        return 0.0;
    }
    let r = small / big;
    big * (1.0 + r * r).sqrt()
}

#[cfg(test)]
mod tests {
    use super::hypot;

    #[test]
    fn hypot_matches_pythagoras() {
        assert_eq!(hypot(3.0, 4.0), 5.0);
        assert_eq!(hypot(0.0, 0.0), 0.0);
        assert_eq!(hypot(-2.0, 0.0), 2.0);
        assert!((hypot(1e300, 1e300) - 1e300 * 2f64.sqrt()).abs() < 1e285);
    }
}
