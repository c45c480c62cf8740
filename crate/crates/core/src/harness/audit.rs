use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::contour::{Contour, QuadratureRule};
use crate::discrete::{BandedOperator, ShiftedJacobi};
use crate::error::{Error, Result};

/// Damping of the audited Jacobi iteration.
pub const AUDIT_OMEGA: f64 = 0.5;

/// Communication pattern observed while realizing `r ≡ 1` iteratively.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalityReport {
    /// Allowed radius `|i − j|` of a read.
    pub expected_width: usize,
    /// Largest radius actually read.
    pub max_width: usize,
    /// Distinct nodes read by each node in one sweep.
    pub reads_per_node: Vec<usize>,
    /// Jacobi sweeps per quadrature node.
    pub iterations: Vec<usize>,
    /// Final relative residual per quadrature node.
    pub residuals: Vec<f64>,
    /// Whether every quadrature node reached the tolerance.
    pub converged: bool,
}

/// Runs the damped Jacobi realization at every node of `rule` on `contour`
/// and checks that node `i` only ever reads nodes `j` with `|i − j| ≤ expected_width`.
///
/// The check is structural, so a non-convergent iteration still yields a report.
pub fn locality_audit(
    op: &BandedOperator,
    expected_width: usize,
    contour: &Contour,
    rule: &QuadratureRule,
    max_iter: usize,
    tol: f64,
) -> Result<LocalityReport> {
    let n = op.dim();
    let z: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * libm::sin(0.7 * i as f64))
        .collect();
    let mut max_width = 0usize;
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut violation: Option<(usize, usize)> = None;
    let mut iterations = Vec::with_capacity(rule.len());
    let mut residuals = Vec::with_capacity(rule.len());
    let mut converged = true;
    for &t in &rule.thetas {
        let xi = contour.point(t);
        let c = Complex64::new(0.0, -1.0) * contour.derivative(t);
        let re: Vec<f64> = z.iter().map(|v| c.re * v).collect();
        let im: Vec<f64> = z.iter().map(|v| c.im * v).collect();
        let mut observer = |i: usize, j: usize| {
            let d = i.abs_diff(j);
            max_width = max_width.max(d);
            if d > expected_width && violation.is_none() {
                violation = Some((i, j));
            }
            if !neighbors[i].contains(&j) {
                neighbors[i].push(j);
            }
        };
        let out =
            ShiftedJacobi::new(op, xi, AUDIT_OMEGA).run(&re, &im, max_iter, tol, &mut observer);
        if let Some((row, col)) = violation {
            return Err(Error::StructuralFailure {
                row,
                col,
                radius: expected_width,
            });
        }
        converged &= out.converged;
        iterations.push(out.iterations);
        residuals.push(out.residual);
    }
    Ok(LocalityReport {
        expected_width,
        max_width,
        reads_per_node: neighbors.iter().map(Vec::len).collect(),
        iterations,
        residuals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::BandMatrix;
    use crate::discrete::{biharmonic_1d_clamped, laplacian_1d_dirichlet};
    use core::f64::consts::PI;
    use nalgebra::DMatrix;

    #[test]
    fn tridiagonal_reads_one_neighbor() {
        let op = laplacian_1d_dirichlet(16, PI).unwrap();
        let c = Contour::circle(5.0).unwrap();
        let rule = QuadratureRule::trapezoid(8).unwrap();
        let rep = locality_audit(&op, 1, &c, &rule, 20000, 1e-8).unwrap();
        assert_eq!(rep.max_width, 1);
        assert!(rep.converged);
        assert_eq!(rep.reads_per_node[0], 2);
        assert_eq!(rep.reads_per_node[5], 3);
    }

    #[test]
    fn pentadiagonal_reads_two_neighbors() {
        let op = biharmonic_1d_clamped(20, 4.73).unwrap();
        let c = Contour::circle(5.0).unwrap();
        let rule = QuadratureRule::trapezoid(4).unwrap();
        let rep = locality_audit(&op, 2, &c, &rule, 50, 1e-8).unwrap();
        assert_eq!(rep.max_width, 2);
        assert_eq!(rep.reads_per_node[8], 5);
    }

    #[test]
    fn dense_operator_is_rejected() {
        let n = 8;
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { 4.0 } else { 0.1 });
        let op = BandedOperator::custom(BandMatrix::from_dense(&m), 1.0, true).unwrap();
        let c = Contour::circle(5.0).unwrap();
        let rule = QuadratureRule::trapezoid(4).unwrap();
        let err = locality_audit(&op, 1, &c, &rule, 10, 1e-8).unwrap_err();
        assert!(matches!(err, Error::StructuralFailure { radius: 1, .. }));
    }
}
