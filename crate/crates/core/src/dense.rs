//! Bounded dense eigensolvers.
//!
//! The unbounded nalgebra variants can cycle forever on some inputs, so every
//! caller goes through these and gets `None` instead of a hang.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Sweep cap for the QR iterations below.
pub const EIGEN_MAX_ITER: usize = 10_000;

/// Eigenvalues of a real square matrix through a real Schur form.
///
/// A stalled QR iteration is retried on `H m H` for a few fixed Householder
/// reflections `H`; the spectrum is unchanged but the shift cycle is broken.
pub fn eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    for attempt in 0..4 {
        let work = if attempt == 0 {
            m.clone()
        } else {
            let h = reflection(n, attempt);
            &h * m * &h
        };
        if let Some(schur) = work.try_schur(f64::EPSILON, EIGEN_MAX_ITER) {
            return Some(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    None
}

/// `I − 2vvᵀ/‖v‖²` for a deterministic dense `v`.
fn reflection(n: usize, seed: usize) -> DMatrix<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| libm::sin(0.9 * (seed * n + i + 1) as f64) + 0.1)
        .collect();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    DMatrix::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vv,
    )
}

/// Symmetric eigendecomposition.
pub fn symmetric_eigen(m: DMatrix<f64>) -> Option<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m, f64::EPSILON, EIGEN_MAX_ITER)
}
