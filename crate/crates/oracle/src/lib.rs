//! Reference eigensolvers for dense complex matrices.
//!
//! Two unrelated algorithms live here: a Hessenberg reduction followed by
//! single-shift QR, and (for tiny matrices) simultaneous Newton iteration on
//! the characteristic determinant. Neither shares code with the similarity
//! machinery they are used to check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod aberth;
mod hessenberg;
mod qr;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use aberth::determinant_roots;
pub use hessenberg::{hessenberg, Hessenberg};
pub use qr::{eigen, eigenvalues, EigenDecomposition};

/// Largest dimension for which the determinant-root oracle is used.
pub const DUAL_ORACLE_MAX_DIM: usize = 8;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds oracle cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge for trailing index {index} after {iterations} sweeps")]
    NoConvergence { index: usize, iterations: usize },
    #[error("determinant root iteration did not converge after {iterations} steps")]
    RootsNoConvergence { iterations: usize },
    #[error("oracles disagree: max pairing distance {distance:e} exceeds {tolerance:e}")]
    Disagreement { distance: f64, tolerance: f64 },
}

pub(crate) fn check_input(m: &DMatrix<Complex64>) -> Result<(), OracleError> {
    if m.nrows() != m.ncols() {
        return Err(OracleError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(OracleError::NonFinite);
    }
    Ok(())
}

/// Largest distance in a greedy nearest pairing of two equal-size multisets.
///
/// Pairs are taken in order of increasing distance; equal distances go to the
/// lower index of `a`, then of `b`.
pub fn pairing_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let n = a.len();
    let mut pairs = Vec::with_capacity(n * n);
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut worst = 0.0f64;
    let mut left = n;
    for (d, i, j) in pairs {
        if left == 0 {
            break;
        }
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        left -= 1;
    }
    worst
}

/// Eigenvalues by QR, cross-checked against determinant roots when the
/// dimension is at most [`DUAL_ORACLE_MAX_DIM`].
///
/// The cross-check tolerance is `tol * max(1, ||M||_F)`.
pub fn checked_eigenvalues(m: &DMatrix<Complex64>, tol: f64) -> Result<Vec<Complex64>, OracleError> {
    let qr = eigenvalues(m)?;
    if m.nrows() <= DUAL_ORACLE_MAX_DIM && m.nrows() > 0 {
        let roots = determinant_roots(m)?;
        let tolerance = tol * m.norm().max(1.0);
        let distance = pairing_distance(&qr, &roots);
        if !(distance <= tolerance) {
            return Err(OracleError::Disagreement { distance, tolerance });
        }
    }
    Ok(qr)
}
