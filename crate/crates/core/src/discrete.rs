//! Banded finite-difference operators, their spectral decomposition and
//! shifted solves.
//!
//! The operators of interest define `Λ_h = A_h⁻¹` for a banded `A_h`. Shifted
//! systems `(ξ - Λ_h) v = r` are multiplied through by `A_h` so that every
//! solve stays banded: `(ξ A_h - I) v = A_h r`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::band::{BandLu, BandMatrix};
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense eigensolver oracle.
pub const EIGEN_DIM_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OperatorRole {
    Laplacian1D,
    Biharmonic1D,
    Custom,
}

/// Grid operator `A_h` in band storage.
#[derive(Debug, Clone)]
pub struct BandedOperator {
    role: OperatorRole,
    h: f64,
    matrix: BandMatrix,
    inverse_defines_lambda: bool,
    factor: Option<BandLu>,
}

impl BandedOperator {
    /// Wraps an arbitrary band matrix. When `inverse_defines_lambda` is set,
    /// `Λ_h = A⁻¹` and `A` must be nonsingular.
    pub fn custom(matrix: BandMatrix, h: f64, inverse_defines_lambda: bool) -> Result<Self> {
        Self::with_role(OperatorRole::Custom, matrix, h, inverse_defines_lambda)
    }

    fn with_role(
        role: OperatorRole,
        matrix: BandMatrix,
        h: f64,
        inverse_defines_lambda: bool,
    ) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::invalid("operator dimension must be positive"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        let factor = if inverse_defines_lambda {
            Some(
                matrix
                    .lu()
                    .map_err(|_| Error::AssemblyFailure("operator matrix is singular".into()))?,
            )
        } else {
            None
        };
        Ok(Self {
            role,
            h,
            matrix,
            inverse_defines_lambda,
            factor,
        })
    }

    pub fn role(&self) -> OperatorRole {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn inverse_defines_lambda(&self) -> bool {
        self.inverse_defines_lambda
    }

    /// Stencil half-width implied by the role; the effective width for custom operators.
    pub fn nominal_bandwidth(&self) -> usize {
        match self.role {
            OperatorRole::Laplacian1D => 1,
            OperatorRole::Biharmonic1D => 2,
            OperatorRole::Custom => self.matrix.effective_bandwidth(),
        }
    }

    /// Interior grid points `x_j = j h`, `j = 1..=n`.
    pub fn grid(&self) -> Vec<f64> {
        (1..=self.dim()).map(|j| j as f64 * self.h).collect()
    }

    pub fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    /// `Λ_h x`, by a banded solve when `Λ_h = A⁻¹`.
    pub fn apply_lambda(&self, x: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(lu) => lu.solve(x),
            None => self.matrix.matvec(x),
        }
    }

    /// Dense `Λ_h`; oracle use only.
    pub fn lambda_dense(&self) -> DMatrix<f64> {
        let a = self.matrix.to_dense();
        if self.inverse_defines_lambda {
            a.try_inverse().expect("factorized operator is invertible")
        } else {
            a
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.matrix.triplets()
    }

    /// The real interleaved block matrix of `(ξ P - Q)`, with `(P, Q) = (A, I)`
    /// when `Λ_h = A⁻¹` and `(I, A)` otherwise. Unknowns are ordered
    /// `(v1_0, v2_0, v1_1, v2_1, ...)`.
    pub fn block_matrix(&self, xi: Complex64) -> BandMatrix {
        let n = self.dim();
        let w = self
            .matrix
            .lower_bandwidth()
            .max(self.matrix.upper_bandwidth());
        let mut m = BandMatrix::zeros(2 * n, 2 * w + 1, 2 * w + 1);
        for i in 0..n {
            for j in self.matrix.row_columns(i) {
                let (p, q) = self.pq(i, j);
                if p == 0.0 && q == 0.0 {
                    continue;
                }
                let diag = xi.re * p - q;
                m.set(2 * i, 2 * j, diag);
                m.set(2 * i, 2 * j + 1, -xi.im * p);
                m.set(2 * i + 1, 2 * j, xi.im * p);
                m.set(2 * i + 1, 2 * j + 1, diag);
            }
            if !self.matrix.row_columns(i).contains(&i) {
                let (p, q) = self.pq(i, i);
                m.set(2 * i, 2 * i, xi.re * p - q);
                m.set(2 * i + 1, 2 * i + 1, xi.re * p - q);
            }
        }
        m
    }

    fn pq(&self, i: usize, j: usize) -> (f64, f64) {
        let a = self.matrix.get(i, j);
        let id = if i == j { 1.0 } else { 0.0 };
        if self.inverse_defines_lambda {
            (a, id)
        } else {
            (id, a)
        }
    }

    fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        if self.inverse_defines_lambda {
            x.to_vec()
        } else {
            self.matrix.matvec(x)
        }
    }

    /// `‖ξP − Q‖∞` of the real block matrix.
    fn block_norm(&self, xi: Complex64) -> f64 {
        (0..self.dim())
            .map(|i| {
                self.matrix
                    .row_columns(i)
                    .map(|j| {
                        let (p, q) = self.pq(i, j);
                        (xi.re * p - q).abs() + (xi.im * p).abs()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn apply_p(&self, x: &[f64]) -> Vec<f64> {
        if self.inverse_defines_lambda {
            self.matrix.matvec(x)
        } else {
            x.to_vec()
        }
    }

    /// Factorizes the block system for shift `ξ`.
    pub fn shifted_factor(&self, xi: Complex64) -> Result<ShiftedFactor<'_>> {
        let lu = self
            .block_matrix(xi)
            .lu()
            .map_err(|_| Error::ShiftSingular { node: 0 })?;
        Ok(ShiftedFactor { op: self, xi, lu })
    }

    pub fn eigendecompose(&self) -> Result<ModalData> {
        eigendecompose(self)
    }
}

/// Prefactored shifted block system for one contour node.
#[derive(Debug, Clone)]
pub struct ShiftedFactor<'a> {
    op: &'a BandedOperator,
    xi: Complex64,
    lu: BandLu,
}

impl ShiftedFactor<'_> {
    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    /// Solves `ξ1 v1 - ξ2 v2 - Λ_h v1 = re`, `ξ2 v1 + ξ1 v2 - Λ_h v2 = im`.
    pub fn solve(&self, rhs_re: &[f64], rhs_im: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.op.dim();
        assert!(
            rhs_re.len() == n && rhs_im.len() == n,
            "right-hand side length mismatch"
        );
        let pre = self.op.apply_p(rhs_re);
        let pim = self.op.apply_p(rhs_im);
        let mut b = vec![0.0; 2 * n];
        for i in 0..n {
            b[2 * i] = pre[i];
            b[2 * i + 1] = pim[i];
        }
        self.lu.solve_in_place(&mut b);
        let v1 = (0..n).map(|i| b[2 * i]).collect();
        let v2 = (0..n).map(|i| b[2 * i + 1]).collect();
        (v1, v2)
    }

    /// Normwise backward error `‖b − Mv‖∞ / (‖M‖∞‖v‖∞ + ‖b‖∞)` of the block
    /// system `M = ξP − Q`, `b = P·rhs` as it is solved.
    pub fn residual(&self, v1: &[f64], v2: &[f64], rhs_re: &[f64], rhs_im: &[f64]) -> f64 {
        let (x1, x2) = (self.xi.re, self.xi.im);
        let (b1, b2) = (self.op.apply_p(rhs_re), self.op.apply_p(rhs_im));
        let (p1, p2) = (self.op.apply_p(v1), self.op.apply_p(v2));
        let (q1, q2) = (self.op.apply_q(v1), self.op.apply_q(v2));
        let mut num = 0.0_f64;
        let mut bnorm = 0.0_f64;
        let mut vnorm = 0.0_f64;
        for i in 0..v1.len() {
            let r1 = b1[i] - (x1 * p1[i] - x2 * p2[i] - q1[i]);
            let r2 = b2[i] - (x2 * p1[i] + x1 * p2[i] - q2[i]);
            num = num.max(r1.abs()).max(r2.abs());
            bnorm = bnorm.max(b1[i].abs()).max(b2[i].abs());
            vnorm = vnorm.max(v1[i].abs()).max(v2[i].abs());
        }
        let den = self.op.block_norm(self.xi) * vnorm + bnorm;
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

/// One-shot shifted solve returning `(v1, v2)` after a residual check.
pub fn shifted_block_solve(
    op: &BandedOperator,
    xi: Complex64,
    rhs_re: &[f64],
    rhs_im: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if rhs_re.len() != op.dim() || rhs_im.len() != op.dim() {
        return Err(Error::invalid(
            "right-hand side length does not match the operator",
        ));
    }
    let f = op.shifted_factor(xi)?;
    let (v1, v2) = f.solve(rhs_re, rhs_im);
    let res = f.residual(&v1, &v2, rhs_re, rhs_im);
    if !(res <= SHIFT_RESIDUAL_TOL) {
        return Err(Error::ShiftSingular { node: 0 });
    }
    Ok((v1, v2))
}

/// Relative residual accepted for a shifted solve.
pub const SHIFT_RESIDUAL_TOL: f64 = 1e-10;

/// Tridiagonal `(−1, 2, −1)/h²` on `n_cells − 1` interior nodes, `h = length / n_cells`.
pub fn laplacian_1d_dirichlet(n_cells: usize, length: f64) -> Result<BandedOperator> {
    if n_cells < 4 {
        return Err(Error::invalid(format!(
            "laplacian needs at least 4 cells, got {n_cells}"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("length must be positive"));
    }
    let h = length / n_cells as f64;
    let n = n_cells - 1;
    let s = 1.0 / (h * h);
    let mut a = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        a.set(i, i, 2.0 * s);
        if i > 0 {
            a.set(i, i - 1, -s);
        }
        if i + 1 < n {
            a.set(i, i + 1, -s);
        }
    }
    BandedOperator::with_role(OperatorRole::Laplacian1D, a, h, true)
}

/// Pentadiagonal `(1, −4, 6, −4, 1)/h⁴` with the one-sided clamped boundary rows
/// `(2h³, −h³/2)/h⁴` in the first and last row (mirrored).
pub fn biharmonic_1d_clamped(n_cells: usize, length: f64) -> Result<BandedOperator> {
    if n_cells < 6 {
        return Err(Error::invalid(format!(
            "biharmonic needs at least 6 cells, got {n_cells}"
        )));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::invalid("length must be positive"));
    }
    let h = length / n_cells as f64;
    let n = n_cells - 1;
    let s = 1.0 / (h * h * h * h);
    let stencil = [1.0, -4.0, 6.0, -4.0, 1.0];
    let mut a = BandMatrix::zeros(n, 2, 2);
    for i in 1..n - 1 {
        for (k, c) in stencil.iter().enumerate() {
            let j = i as isize + k as isize - 2;
            if j >= 0 && (j as usize) < n {
                a.set(i, j as usize, c * s);
            }
        }
    }
    let h3 = h * h * h;
    a.set(0, 0, 2.0 * h3 * s);
    a.set(0, 1, -0.5 * h3 * s);
    a.set(n - 1, n - 1, 2.0 * h3 * s);
    a.set(n - 1, n - 2, -0.5 * h3 * s);
    BandedOperator::with_role(OperatorRole::Biharmonic1D, a, h, true)
}

/// Eigenpairs of `Λ_h` with eigenvalues ascending.
///
/// `vectors` holds right eigenvectors as columns and `dual` the matching left
/// eigenvectors as rows, with `dual · vectors = I`. For symmetric operators the
/// vectors are orthonormal and `dual = vectorsᵀ`.
#[derive(Debug, Clone)]
pub struct ModalData {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub dual: DMatrix<f64>,
    pub symmetric: bool,
}

/// Residual accepted for non-symmetric eigenpairs, relative to `‖A‖`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

pub fn eigendecompose(op: &BandedOperator) -> Result<ModalData> {
    let n = op.dim();
    if n > EIGEN_DIM_LIMIT {
        return Err(Error::invalid(format!(
            "dimension {n} exceeds the dense eigensolver limit"
        )));
    }
    let a = op.matrix().to_dense();
    let to_lambda = |mu: f64| {
        if op.inverse_defines_lambda {
            1.0 / mu
        } else {
            mu
        }
    };
    if op.matrix().is_symmetric(1e-14) {
        let eig = crate::dense::symmetric_eigen(a).ok_or_else(|| {
            Error::NumericFailure("symmetric eigensolver did not converge".into())
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        let lam: Vec<f64> = eig.eigenvalues.iter().map(|&m| to_lambda(m)).collect();
        order.sort_by(|&i, &j| lam[i].total_cmp(&lam[j]));
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let dual = vectors.transpose();
        let eigenvalues = order.iter().map(|&i| lam[i]).collect();
        return Ok(ModalData {
            eigenvalues,
            vectors,
            dual,
            symmetric: true,
        });
    }
    nonsymmetric_decompose(op, &a, to_lambda)
}

fn nonsymmetric_decompose(
    op: &BandedOperator,
    a: &DMatrix<f64>,
    to_lambda: impl Fn(f64) -> f64,
) -> Result<ModalData> {
    let n = a.nrows();
    let complex = crate::dense::eigenvalues(a)
        .ok_or_else(|| Error::NumericFailure("Schur iteration did not converge".into()))?;
    let scale = a
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if complex.iter().any(|z| z.im.abs() > 1e-8 * scale) {
        return Err(Error::NumericFailure(
            "operator has complex eigenvalues".into(),
        ));
    }
    let mut mus: Vec<f64> = complex.iter().map(|z| z.re).collect();
    if mus.iter().any(|m| *m == 0.0) {
        return Err(Error::NumericFailure(
            "operator has a zero eigenvalue".into(),
        ));
    }
    mus.sort_by(|x, y| to_lambda(*x).total_cmp(&to_lambda(*y)));
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &mu) in mus.iter().enumerate() {
        let v = inverse_iteration(op.matrix(), mu, c)?;
        vectors.set_column(c, &v);
    }
    let dual = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericFailure("eigenvectors are linearly dependent".into()))?;
    // Two-sided Rayleigh refinement.
    let av = a * &vectors;
    let mut eigenvalues = Vec::with_capacity(n);
    for c in 0..n {
        let mu = dual.row(c).dot(&av.column(c).transpose());
        let res = (av.column(c) - vectors.column(c) * mu).norm();
        if !(res <= EIGEN_RESIDUAL_TOL * scale * vectors.column(c).norm()) {
            return Err(Error::NumericFailure(format!(
                "eigenpair {c} residual {res:e}"
            )));
        }
        eigenvalues.push(to_lambda(mu));
    }
    let bi = (&dual * &vectors - DMatrix::identity(n, n)).abs().max();
    if !(bi <= 1e-8) {
        return Err(Error::NumericFailure(format!(
            "bi-orthogonality defect {bi:e}"
        )));
    }
    Ok(ModalData {
        eigenvalues,
        vectors,
        dual,
        symmetric: false,
    })
}

fn inverse_iteration(a: &BandMatrix, mu: f64, seed: usize) -> Result<DVector<f64>> {
    let n = a.dim();
    // The shift must stay off the eigenvalue by more than the singular-pivot threshold.
    let scale = a.max_abs();
    let lu = [1e-10 * mu.abs().max(1.0), 1e-9 * scale, 1e-7 * scale]
        .iter()
        .find_map(|d| a.shifted(mu + d).lu().ok())
        .ok_or_else(|| Error::NumericFailure(format!("inverse iteration failed at {mu}")))?;
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * libm::sin((i * 7 + seed * 13 + 1) as f64))
        .collect();
    for _ in 0..4 {
        lu.solve_in_place(&mut x);
        let norm = libm::sqrt(x.iter().map(|v| v * v).sum());
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NumericFailure(format!(
                "inverse iteration diverged at {mu}"
            )));
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    // Sign convention: largest-magnitude entry positive.
    let k = (0..n)
        .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
        .unwrap_or(0);
    if x[k] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(DVector::from_vec(x))
}

impl ModalData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Modal coordinates `z_k` of `z`.
    pub fn coordinates(&self, z: &[f64]) -> Vec<f64> {
        let zv = DVector::from_column_slice(z);
        (&self.dual * zv).iter().copied().collect()
    }

    /// `Σ c_k φ_k`.
    pub fn synthesize(&self, coords: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(coords);
        (&self.vectors * c).iter().copied().collect()
    }

    /// `f(Λ_h) z = Σ f(λ_k) z_k φ_k`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(Error::invalid("vector length does not match the operator"));
        }
        let mut coords = self.coordinates(z);
        for (c, &lam) in coords.iter_mut().zip(&self.eigenvalues) {
            let v = f(lam);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    location: lam,
                    what: "function value".into(),
                });
            }
            *c *= v;
        }
        Ok(self.synthesize(&coords))
    }

    /// Dense `f(Λ_h)`.
    pub fn function_matrix(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let mut scaled = self.dual.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let v = f(lam);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    location: lam,
                    what: "function value".into(),
                });
            }
            scaled.row_mut(k).scale_mut(v);
        }
        Ok(&self.vectors * scaled)
    }

    /// `‖Λ_h - V diag(λ) V⁻¹‖` relative to `‖Λ_h‖`, entrywise max.
    pub fn reconstruction_error(&self, lambda: &DMatrix<f64>) -> f64 {
        let rebuilt = self.function_matrix(|x| x).expect("identity is finite");
        let scale = lambda.abs().max().max(f64::MIN_POSITIVE);
        (rebuilt - lambda).abs().max() / scale
    }
}

/// Convenience form of [`ModalData::apply_function`] that decomposes `op` first.
pub fn apply_function_spectral(
    f: impl Fn(f64) -> f64,
    op: &BandedOperator,
    z: &[f64],
) -> Result<Vec<f64>> {
    op.eigendecompose()?.apply_function(f, z)
}

/// Eigenvalues `(length/(iπ))²` of the continuum inverse Dirichlet Laplacian.
pub fn laplacian_continuum_eigenvalues(count: usize, length: f64) -> Vec<f64> {
    (1..=count)
        .map(|i| {
            let r = length / (i as f64 * core::f64::consts::PI);
            r * r
        })
        .collect()
}

/// Orthonormal Dirichlet sine mode `√(2/L) sin(iπx/L)`.
pub fn laplacian_continuum_mode(i: usize, length: f64, x: f64) -> f64 {
    libm::sqrt(2.0 / length) * libm::sin(i as f64 * core::f64::consts::PI * x / length)
}

/// First `count` positive roots of `cos(x) cosh(x) = 1`.
pub fn clamped_beam_roots(count: usize) -> Vec<f64> {
    let g = |x: f64| libm::cos(x) - 1.0 / libm::cosh(x);
    (1..=count)
        .map(|k| {
            let c = (k as f64 + 0.5) * core::f64::consts::PI;
            let (mut lo, mut hi) = (c - 0.5, c + 0.5);
            let glo = g(lo);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (g(mid) > 0.0) == (glo > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Clamped-clamped beam modes on `[0, length]`.
#[derive(Debug, Clone)]
pub struct ClampedBeamModes {
    pub length: f64,
    /// Products `β_i L`.
    pub roots: Vec<f64>,
}

impl ClampedBeamModes {
    pub fn new(count: usize, length: f64) -> Self {
        Self {
            length,
            roots: clamped_beam_roots(count),
        }
    }

    /// Eigenvalues `(L / β_i L)⁴` of the inverse continuum operator.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.roots
            .iter()
            .map(|r| {
                let q = self.length / r;
                q * q * q * q
            })
            .collect()
    }

    /// L²-normalized mode `i` (zero-based) at `x`.
    pub fn mode(&self, i: usize, x: f64) -> f64 {
        let bl = self.roots[i];
        let beta = bl / self.length;
        let bx = beta * x;
        let denom = libm::sinh(bl) - libm::sin(bl);
        let sigma = (libm::cosh(bl) - libm::cos(bl)) / denom;
        let one_minus_sigma = (libm::cos(bl) - libm::sin(bl) - libm::exp(-bl)) / denom;
        // cosh - σ sinh written to avoid cancellation at large βx.
        let hyper = 0.5 * (one_minus_sigma * libm::exp(bx) + (1.0 + sigma) * libm::exp(-bx));
        let phi = hyper - libm::cos(bx) + sigma * libm::sin(bx);
        phi / libm::sqrt(self.length)
    }
}

/// Damped node-block Jacobi iteration for the shifted block system.
///
/// Each update of node `i` reads only the nodes `j` with `A_ij ≠ 0`; every read
/// is reported to the observer as `(i, j)`.
#[derive(Debug, Clone)]
pub struct ShiftedJacobi<'a> {
    op: &'a BandedOperator,
    xi: Complex64,
    omega: f64,
}

/// Outcome of a Jacobi run.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiOutcome {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl<'a> ShiftedJacobi<'a> {
    pub fn new(op: &'a BandedOperator, xi: Complex64, omega: f64) -> Self {
        Self { op, xi, omega }
    }

    pub fn run(
        &self,
        rhs_re: &[f64],
        rhs_im: &[f64],
        max_iter: usize,
        tol: f64,
        observer: &mut dyn FnMut(usize, usize),
    ) -> JacobiOutcome {
        let n = self.op.dim();
        let b1 = self.op.apply_p(rhs_re);
        let b2 = self.op.apply_p(rhs_im);
        let bnorm =
            libm::sqrt(b1.iter().chain(&b2).map(|v| v * v).sum::<f64>()).max(f64::MIN_POSITIVE);
        let (x1, x2) = (self.xi.re, self.xi.im);
        let mut v1 = vec![0.0; n];
        let mut v2 = vec![0.0; n];
        let mut residual = 1.0;
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let mut n1 = vec![0.0; n];
            let mut n2 = vec![0.0; n];
            let mut rsq = 0.0;
            for i in 0..n {
                let (mut r1, mut r2) = (b1[i], b2[i]);
                let (mut d1, mut d2) = (0.0, 0.0);
                for j in self.op.matrix.row_columns(i) {
                    let (p, q) = self.op.pq(i, j);
                    if p == 0.0 && q == 0.0 {
                        continue;
                    }
                    observer(i, j);
                    // Block (ξ1 p - q, -ξ2 p; ξ2 p, ξ1 p - q) acting on (v1_j, v2_j).
                    let re = x1 * p - q;
                    let im = x2 * p;
                    r1 -= re * v1[j] - im * v2[j];
                    r2 -= im * v1[j] + re * v2[j];
                    if i == j {
                        d1 = re;
                        d2 = im;
                    }
                }
                if !self.op.matrix.row_columns(i).contains(&i) || (d1 == 0.0 && d2 == 0.0) {
                    let (p, q) = self.op.pq(i, i);
                    d1 = x1 * p - q;
                    d2 = x2 * p;
                }
                rsq += r1 * r1 + r2 * r2;
                // Complex division by the diagonal block d1 + i d2.
                let det = d1 * d1 + d2 * d2;
                n1[i] = v1[i] + self.omega * (d1 * r1 + d2 * r2) / det;
                n2[i] = v2[i] + self.omega * (d1 * r2 - d2 * r1) / det;
            }
            residual = libm::sqrt(rsq) / bnorm;
            if residual <= tol {
                iterations -= 1;
                break;
            }
            v1 = n1;
            v2 = n2;
        }
        JacobiOutcome {
            v1,
            v2,
            iterations,
            residual,
            converged: residual <= tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn laplacian_small_matrix() {
        let op = laplacian_1d_dirichlet(4, PI).unwrap();
        let h = PI / 4.0;
        assert_eq!(op.dim(), 3);
        let d = op.matrix().to_dense();
        for i in 0..3 {
            assert!((d[(i, i)] - 2.0 / (h * h)).abs() < 1e-12);
        }
        assert!((d[(0, 1)] + 1.0 / (h * h)).abs() < 1e-12);
        assert!((d[(1, 2)] + 1.0 / (h * h)).abs() < 1e-12);
        assert_eq!(d[(0, 2)], 0.0);
        assert!(matches!(
            laplacian_1d_dirichlet(3, PI),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn laplacian_eigenvalues_match_sine_formula() {
        for cells in [8, 33, 100] {
            let op = laplacian_1d_dirichlet(cells, PI).unwrap();
            let modal = op.eigendecompose().unwrap();
            assert!(modal.symmetric);
            let h = op.h();
            let mut expected: Vec<f64> = (1..cells)
                .map(|j| {
                    let s = libm::sin(j as f64 * h / 2.0);
                    4.0 / (h * h) * s * s
                })
                .collect();
            expected.sort_by(|a, b| b.total_cmp(a));
            for (lam, mu) in modal.eigenvalues.iter().zip(&expected) {
                assert!((1.0 / lam - mu).abs() < 1e-10 * mu.max(1.0));
            }
            let v = &modal.vectors;
            let gram = v.transpose() * v;
            assert!((gram - DMatrix::identity(cells - 1, cells - 1)).abs().max() < 1e-10);
            assert!(modal.reconstruction_error(&op.lambda_dense()) < 1e-10);
        }
    }

    #[test]
    fn laplacian_smallest_eigenvalue_converges_quadratically() {
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&c| {
                let op = laplacian_1d_dirichlet(c, PI).unwrap();
                let modal = op.eigendecompose().unwrap();
                (1.0 / modal.eigenvalues[c - 2] - 1.0).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = libm::log2(w[0] / w[1]);
            assert!((order - 2.0).abs() < 0.2, "order {order}");
        }
    }

    #[test]
    fn biharmonic_rows_as_printed() {
        let op = biharmonic_1d_clamped(10, 4.73).unwrap();
        let h = op.h();
        let s = 1.0 / libm::pow(h, 4.0);
        let d = op.matrix().to_dense();
        let n = op.dim();
        for i in 2..n - 2 {
            let row: Vec<f64> = (i - 2..=i + 2).map(|j| d[(i, j)] / s).collect();
            for (got, want) in row.iter().zip([1.0, -4.0, 6.0, -4.0, 1.0]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        assert!((d[(0, 0)] - 2.0 / h).abs() < 1e-9);
        assert!((d[(0, 1)] + 1.0 / (2.0 * h)).abs() < 1e-9);
        assert_eq!(d[(0, 2)], 0.0);
        assert!((d[(n - 1, n - 1)] - 2.0 / h).abs() < 1e-9);
        assert!((d[(n - 1, n - 2)] + 1.0 / (2.0 * h)).abs() < 1e-9);
        for (j, want) in [-4.0, 6.0, -4.0, 1.0].iter().enumerate() {
            assert!((d[(1, j)] / s - want).abs() < 1e-12);
        }
        assert!(!op.matrix().is_symmetric(1e-12));
        assert!(matches!(
            biharmonic_1d_clamped(5, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn biharmonic_spectrum_is_real_positive_and_biorthogonal() {
        let op = biharmonic_1d_clamped(40, 4.73).unwrap();
        let modal = op.eigendecompose().unwrap();
        assert!(!modal.symmetric);
        assert!(modal.eigenvalues.iter().all(|l| *l > 0.0));
        assert!(modal.reconstruction_error(&op.lambda_dense()) < 1e-8);
    }

    #[test]
    fn beam_roots_and_modes() {
        let beam = ClampedBeamModes::new(3, 4.73);
        assert!((beam.roots[0] - 4.730_040_7).abs() < 1e-6);
        assert!((beam.roots[1] - 7.853_204_6).abs() < 1e-6);
        assert!((beam.eigenvalues()[0] - 1.0).abs() < 1e-4);
        // Clamped ends and unit L² norm.
        assert!(beam.mode(0, 0.0).abs() < 1e-12);
        assert!(beam.mode(1, 4.73).abs() < 1e-9);
        let m = 4000;
        let dx = 4.73 / m as f64;
        let norm: f64 = (0..m)
            .map(|k| {
                let x = (k as f64 + 0.5) * dx;
                beam.mode(0, x) * beam.mode(0, x) * dx
            })
            .sum();
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn apply_function_basics() {
        let op = laplacian_1d_dirichlet(20, PI).unwrap();
        let modal = op.eigendecompose().unwrap();
        let z: Vec<f64> = (0..19).map(|i| libm::cos(i as f64 * 0.7)).collect();
        let same = modal.apply_function(|_| 1.0, &z).unwrap();
        let lz = modal.apply_function(|x| x, &z).unwrap();
        let direct = op.apply_lambda(&z);
        for i in 0..19 {
            assert!((same[i] - z[i]).abs() < 1e-10);
            assert!((lz[i] - direct[i]).abs() < 1e-10);
        }
        assert!(matches!(
            modal.apply_function(|x| 1.0 / (x - x), &z),
            Err(Error::Evaluation { .. })
        ));
    }

    #[test]
    fn one_by_one_shift() {
        let mut m = BandMatrix::zeros(1, 0, 0);
        m.set(0, 0, 1.0);
        let op = BandedOperator::custom(m, 1.0, true).unwrap();
        let (v1, v2) = shifted_block_solve(&op, Complex64::new(2.0, 0.0), &[3.0], &[5.0]).unwrap();
        assert!((v1[0] - 3.0).abs() < 1e-15);
        assert!((v2[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_solve_matches_dense_complex() {
        let op = laplacian_1d_dirichlet(51, 1.0).unwrap();
        let n = op.dim();
        let xi = Complex64::new(0.013, 0.02);
        let re: Vec<f64> = (0..n).map(|i| libm::sin(i as f64)).collect();
        let im: Vec<f64> = (0..n).map(|i| libm::cos(3.0 * i as f64)).collect();
        let (v1, v2) = shifted_block_solve(&op, xi, &re, &im).unwrap();
        let lam = op.lambda_dense().map(|v| Complex64::new(v, 0.0));
        let m = DMatrix::<Complex64>::identity(n, n) * xi - lam;
        let rhs = DVector::from_fn(n, |i, _| Complex64::new(re[i], im[i]));
        let oracle = m.lu().solve(&rhs).unwrap();
        let scale = oracle.norm();
        let err: f64 = (0..n)
            .map(|i| (Complex64::new(v1[i], v2[i]) - oracle[i]).norm_sqr())
            .sum::<f64>();
        assert!(libm::sqrt(err) / scale < 1e-10);
    }

    #[test]
    fn block_bandwidth_matches_operator() {
        let op = biharmonic_1d_clamped(12, 1.0).unwrap();
        let b = op.block_matrix(Complex64::new(1.0, 0.5));
        let node_width = b
            .triplets()
            .iter()
            .map(|(i, j, _)| (i / 2).abs_diff(j / 2))
            .max()
            .unwrap();
        assert_eq!(node_width, op.matrix().effective_bandwidth());
    }

    #[test]
    fn jacobi_converges_on_laplacian_and_reads_neighbours_only() {
        let op = laplacian_1d_dirichlet(12, PI).unwrap();
        let n = op.dim();
        let xi = Complex64::new(5.0, 0.0) * Complex64::from_polar(1.0, 0.4);
        let re: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let im = vec![0.5; n];
        let mut width = 0;
        let out = ShiftedJacobi::new(&op, xi, 1.0).run(&re, &im, 20_000, 1e-12, &mut |i, j| {
            width = width.max(i.abs_diff(j));
        });
        assert!(out.converged);
        assert_eq!(width, 1);
        let (v1, v2) = shifted_block_solve(&op, xi, &re, &im).unwrap();
        for i in 0..n {
            assert!((out.v1[i] - v1[i]).abs() < 1e-8 * (1.0 + v1[i].abs()));
            assert!((out.v2[i] - v2[i]).abs() < 1e-8 * (1.0 + v2[i].abs()));
        }
    }
}
