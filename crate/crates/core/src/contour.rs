//! Closed contours, the periodic trapezoidal rule, and the Cauchy-integral
//! realization `r(Λ_h) z ≈ (1/2π) Σ ω_ℓ v₁^ℓ`.
//!
//! At node `ξ_ℓ` the vector `v^ℓ = v₁ + i v₂` solves
//! `(ξ_ℓ − Λ_h) v = −i ξ'_ℓ r(ξ_ℓ) z`, written as a real block system.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::approx::{RationalEntry, RationalMatrixFunction};
use crate::discrete::{BandedOperator, ModalData, ShiftedFactor, SHIFT_RESIDUAL_TOL};
use crate::error::{Error, Result};
use crate::spectral::{lgl_rule, SpectralInterval, NORM_QUADRATURE_NODES};

/// Points sampled on the interval by [`validate_contour`].
pub const VALIDATION_GRID: usize = 256;
/// Polygon resolution used for winding numbers and margins.
const CURVE_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Contour {
    /// `ξ(θ) = R e^{iθ}`.
    Circle { r: f64 },
    /// `ξ(θ) = (R1/2)(1 + cos θ) + i R2 sin θ`.
    Ellipse { r1: f64, r2: f64 },
}

impl Contour {
    pub fn circle(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("circle radius must be positive"));
        }
        Ok(Contour::Circle { r })
    }

    pub fn ellipse(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::invalid("ellipse parameters must be positive"));
        }
        Ok(Contour::Ellipse { r1, r2 })
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        match *self {
            Contour::Circle { r } => Complex64::from_polar(r, theta),
            Contour::Ellipse { r1, r2 } => {
                Complex64::new(0.5 * r1 * (1.0 + libm::cos(theta)), r2 * libm::sin(theta))
            }
        }
    }

    pub fn derivative(&self, theta: f64) -> Complex64 {
        match *self {
            Contour::Circle { r } => Complex64::new(0.0, 1.0) * Complex64::from_polar(r, theta),
            Contour::Ellipse { r1, r2 } => {
                Complex64::new(-0.5 * r1 * libm::sin(theta), r2 * libm::cos(theta))
            }
        }
    }

    /// Winding number of the curve around `z`.
    pub fn winding_number(&self, z: Complex64) -> i32 {
        winding_on(&self.samples(), z)
    }

    /// Distance from `z` to the sampled curve.
    pub fn distance(&self, z: Complex64) -> f64 {
        distance_on(&self.samples(), z)
    }

    fn samples(&self) -> Vec<Complex64> {
        (0..CURVE_SAMPLES)
            .map(|k| self.point(2.0 * PI * k as f64 / CURVE_SAMPLES as f64))
            .collect()
    }
}

fn winding_on(curve: &[Complex64], z: Complex64) -> i32 {
    let mut total = 0.0;
    let mut prev = curve[curve.len() - 1] - z;
    for &p in curve {
        let cur = p - z;
        total += (cur / prev).arg();
        prev = cur;
    }
    libm::round(total / (2.0 * PI)) as i32
}

fn distance_on(curve: &[Complex64], z: Complex64) -> f64 {
    curve
        .iter()
        .map(|p| (p - z).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Periodic trapezoidal rule `θ_ℓ = 2πℓ/M`, `ω_ℓ = 2π/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub thetas: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Largest accepted node count.
pub const MAX_NODES: usize = 10_000;

impl QuadratureRule {
    pub fn trapezoid(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_NODES {
            return Err(Error::invalid("node count must lie in 1..=10000"));
        }
        let w = 2.0 * PI / m as f64;
        Ok(Self {
            thetas: (0..m).map(|l| w * l as f64).collect(),
            weights: vec![w; m],
        })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// Margins found by [`validate_contour`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContourReport {
    /// Smallest distance from a sampled spectral point to the curve.
    pub spectrum_margin: f64,
    /// Smallest distance from a pole to the curve, if any poles were given.
    pub pole_margin: Option<f64>,
}

/// Checks that `(σ_min, σ_max]` lies inside the curve and every pole outside.
pub fn validate_contour(
    contour: &Contour,
    interval: &SpectralInterval,
    poles: &[Complex64],
) -> Result<ContourReport> {
    let curve = contour.samples();
    let step = interval.length() / VALIDATION_GRID as f64;
    let mut spectrum_margin = f64::INFINITY;
    let mut worst: Option<(f64, f64)> = None;
    for k in 1..=VALIDATION_GRID {
        let x = interval.sigma_min + step * k as f64;
        let z = Complex64::new(x, 0.0);
        let d = distance_on(&curve, z);
        if winding_on(&curve, z) == 0 || d == 0.0 {
            if worst.map_or(true, |(_, wd)| d >= wd) {
                worst = Some((x, d));
            }
        } else {
            spectrum_margin = spectrum_margin.min(d);
        }
    }
    if let Some((point, _)) = worst {
        return Err(Error::SpectrumNotEnclosed { point });
    }
    let mut pole_margin: Option<f64> = None;
    for &p in poles {
        let d = distance_on(&curve, p);
        if winding_on(&curve, p) != 0 || d == 0.0 {
            return Err(Error::PoleEnclosed { pole: p });
        }
        pole_margin = Some(pole_margin.map_or(d, |m| m.min(d)));
    }
    Ok(ContourReport {
        spectrum_margin,
        pole_margin,
    })
}

/// Scalar trapezoidal approximation of `(1/2πi)∮ r(ξ)/(ξ − λ) dξ`.
pub fn quadrature_scalar(
    r: impl Fn(Complex64) -> Result<Complex64>,
    contour: &Contour,
    rule: &QuadratureRule,
    lambda: f64,
) -> Result<f64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in rule.thetas.iter().zip(&rule.weights) {
        let xi = contour.point(t);
        let c = Complex64::new(0.0, -1.0) * contour.derivative(t) * r(xi)?;
        acc += c * w / (xi - lambda);
    }
    Ok(acc.re / (2.0 * PI))
}

/// Output of [`realize`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationResult {
    /// One grid vector per row of the rational function.
    pub outputs: Vec<Vec<f64>>,
    /// Largest relative block-system residual per quadrature node.
    pub residuals: Vec<f64>,
    pub report: ContourReport,
}

impl RealizationResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Contribution `ω_ℓ v₁^ℓ` of one quadrature node, before the `1/2π` factor.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeContribution {
    pub weighted: Vec<Vec<f64>>,
    pub residual: f64,
}

/// Solves the block systems of node `ell` for every entry of `r`.
pub fn node_contribution(
    r: &RationalMatrixFunction,
    contour: &Contour,
    rule: &QuadratureRule,
    op: &BandedOperator,
    z: &[Vec<f64>],
    ell: usize,
) -> Result<NodeContribution> {
    let (t, w) = (rule.thetas[ell], rule.weights[ell]);
    let xi = contour.point(t);
    let dxi = contour.derivative(t);
    let factor = op
        .shifted_factor(xi)
        .map_err(|_| Error::ShiftSingular { node: ell })?;
    let n = op.dim();
    let mut weighted = vec![vec![0.0; n]; r.rows()];
    let mut residual = 0.0_f64;
    for i in 0..r.rows() {
        for (j, zj) in z.iter().enumerate() {
            let c = Complex64::new(0.0, -1.0) * dxi * r.entry(i, j).eval_complex(xi)?;
            let re: Vec<f64> = zj.iter().map(|v| c.re * v).collect();
            let im: Vec<f64> = zj.iter().map(|v| c.im * v).collect();
            let (v1, v2) = factor.solve(&re, &im);
            let res = factor.residual(&v1, &v2, &re, &im);
            if !(res <= SHIFT_RESIDUAL_TOL) {
                return Err(Error::ShiftSingular { node: ell });
            }
            residual = residual.max(res);
            for (acc, v) in weighted[i].iter_mut().zip(&v1) {
                *acc += w * v;
            }
        }
    }
    Ok(NodeContribution { weighted, residual })
}

/// Sums node contributions in ascending node order and applies `1/2π`.
pub fn accumulate(contributions: &[NodeContribution], report: ContourReport) -> RealizationResult {
    let rows = contributions.first().map_or(0, |c| c.weighted.len());
    let n = contributions
        .first()
        .and_then(|c| c.weighted.first())
        .map_or(0, Vec::len);
    let mut outputs = vec![vec![0.0; n]; rows];
    for c in contributions {
        for (out, w) in outputs.iter_mut().zip(&c.weighted) {
            for (o, v) in out.iter_mut().zip(w) {
                *o += v;
            }
        }
    }
    for out in &mut outputs {
        out.iter_mut().for_each(|v| *v /= 2.0 * PI);
    }
    RealizationResult {
        outputs,
        residuals: contributions.iter().map(|c| c.residual).collect(),
        report,
    }
}

/// Checks the inputs of a realization and returns the contour report.
pub fn prepare_realization(
    r: &RationalMatrixFunction,
    contour: &Contour,
    op: &BandedOperator,
    interval: &SpectralInterval,
    z: &[Vec<f64>],
) -> Result<ContourReport> {
    if z.len() != r.cols() {
        return Err(Error::invalid(
            "one input vector per column of the gain expected",
        ));
    }
    if z.iter().any(|v| v.len() != op.dim()) {
        return Err(Error::invalid(
            "input vector length does not match the operator",
        ));
    }
    let poles: Vec<Complex64> = r.poles()?.into_iter().flatten().collect();
    validate_contour(contour, interval, &poles)
}

/// `out_i = Σ_j r_ij(Λ_h) z_j` by contour quadrature with banded shifted solves.
pub fn realize(
    r: &RationalMatrixFunction,
    contour: &Contour,
    rule: &QuadratureRule,
    op: &BandedOperator,
    interval: &SpectralInterval,
    z: &[Vec<f64>],
) -> Result<RealizationResult> {
    let report = prepare_realization(r, contour, op, interval, z)?;
    let contributions = (0..rule.len())
        .map(|ell| node_contribution(r, contour, rule, op, z, ell))
        .collect::<Result<Vec<_>>>()?;
    Ok(accumulate(&contributions, report))
}

/// Scalar realization `r(Λ_h) z` for a `1×1` rational function.
pub fn realize_scalar(
    r: &RationalEntry,
    contour: &Contour,
    rule: &QuadratureRule,
    op: &BandedOperator,
    interval: &SpectralInterval,
    z: &[f64],
) -> Result<Vec<f64>> {
    let rm = RationalMatrixFunction::scalar(r.clone());
    let mut out = realize(&rm, contour, rule, op, interval, &[z.to_vec()])?;
    Ok(out.outputs.swap_remove(0))
}

/// Shifted factorizations and contour coefficients for repeated realizations
/// with the same gain, contour and operator.
#[derive(Debug, Clone)]
pub struct PreparedRealization<'a> {
    factors: Vec<ShiftedFactor<'a>>,
    // Per node, `−i ξ'_ℓ r_ij(ξ_ℓ)` in row-major entry order.
    coeffs: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    rows: usize,
    cols: usize,
    n: usize,
    pub report: ContourReport,
}

impl<'a> PreparedRealization<'a> {
    pub fn new(
        r: &RationalMatrixFunction,
        contour: &Contour,
        rule: &QuadratureRule,
        op: &'a BandedOperator,
        interval: &SpectralInterval,
    ) -> Result<Self> {
        let zeros = vec![vec![0.0; op.dim()]; r.cols()];
        let report = prepare_realization(r, contour, op, interval, &zeros)?;
        let mut factors = Vec::with_capacity(rule.len());
        let mut coeffs = Vec::with_capacity(rule.len());
        for (ell, (&t, _)) in rule.thetas.iter().zip(&rule.weights).enumerate() {
            let xi = contour.point(t);
            let dxi = contour.derivative(t);
            factors.push(
                op.shifted_factor(xi)
                    .map_err(|_| Error::ShiftSingular { node: ell })?,
            );
            let c = r
                .entries
                .iter()
                .map(|e| Ok(Complex64::new(0.0, -1.0) * dxi * e.eval_complex(xi)?))
                .collect::<Result<Vec<_>>>()?;
            coeffs.push(c);
        }
        Ok(Self {
            factors,
            coeffs,
            weights: rule.weights.clone(),
            rows: r.rows(),
            cols: r.cols(),
            n: op.dim(),
            report,
        })
    }

    /// `out_i = Σ_j r_ij(Λ_h) z_j`, summing nodes in ascending order.
    pub fn apply(&self, z: &[Vec<f64>]) -> Result<RealizationResult> {
        if z.len() != self.cols || z.iter().any(|v| v.len() != self.n) {
            return Err(Error::invalid(
                "input vectors do not match the prepared realization",
            ));
        }
        let mut outputs = vec![vec![0.0; self.n]; self.rows];
        let mut residuals = Vec::with_capacity(self.factors.len());
        for (ell, factor) in self.factors.iter().enumerate() {
            let w = self.weights[ell];
            let mut worst = 0.0_f64;
            let mut weighted = vec![vec![0.0; self.n]; self.rows];
            for i in 0..self.rows {
                for (j, zj) in z.iter().enumerate() {
                    let c = self.coeffs[ell][i * self.cols + j];
                    let re: Vec<f64> = zj.iter().map(|v| c.re * v).collect();
                    let im: Vec<f64> = zj.iter().map(|v| c.im * v).collect();
                    let (v1, v2) = factor.solve(&re, &im);
                    let res = factor.residual(&v1, &v2, &re, &im);
                    if !(res <= SHIFT_RESIDUAL_TOL) {
                        return Err(Error::ShiftSingular { node: ell });
                    }
                    worst = worst.max(res);
                    for (acc, v) in weighted[i].iter_mut().zip(&v1) {
                        *acc += w * v;
                    }
                }
            }
            for (out, wv) in outputs.iter_mut().zip(&weighted) {
                for (o, v) in out.iter_mut().zip(wv) {
                    *o += v;
                }
            }
            residuals.push(worst);
        }
        for out in &mut outputs {
            out.iter_mut().for_each(|v| *v /= 2.0 * PI);
        }
        Ok(RealizationResult {
            outputs,
            residuals,
            report: self.report.clone(),
        })
    }
}

/// One point of an error curve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorPoint {
    pub m: usize,
    /// Relative L² error of the scalar quadrature against the exact symbol.
    pub function_error: f64,
    /// `max_k |r_M(λ_k) − f(λ_k)| / max_k |f(λ_k)|` over the eigenvalues of `Λ_h`.
    pub operator_error: f64,
}

/// Where the function-space error is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorGrid {
    /// LGL quadrature on the interval.
    Lgl(SpectralInterval),
    /// Discrete relative ℓ² error over the given points.
    Points(Vec<f64>),
}

/// `E(M)` for each `M` in `m_list`, using the spectral oracle for the operator norm.
pub fn realization_error_curve(
    r: &RationalEntry,
    exact: impl Fn(f64) -> f64,
    contour: &Contour,
    modal: &ModalData,
    grid: &ErrorGrid,
    m_list: &[usize],
) -> Result<Vec<ErrorPoint>> {
    let (points, weights): (Vec<f64>, Vec<f64>) = match grid {
        ErrorGrid::Lgl(iv) => {
            let rule = lgl_rule(NORM_QUADRATURE_NODES)?;
            (rule.mapped_nodes(iv), rule.weights.clone())
        }
        ErrorGrid::Points(p) => (p.clone(), vec![1.0; p.len()]),
    };
    let exact_pts: Vec<f64> = points.iter().map(|&x| exact(x)).collect();
    let exact_eig: Vec<f64> = modal.eigenvalues.iter().map(|&x| exact(x)).collect();
    let den_f: f64 = exact_pts.iter().zip(&weights).map(|(v, w)| w * v * v).sum();
    let den_o = exact_eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if den_f == 0.0 || den_o == 0.0 {
        return Err(Error::DivisionDegenerate);
    }
    let eval = |xi: Complex64| r.eval_complex(xi);
    m_list
        .iter()
        .map(|&m| {
            let rule = QuadratureRule::trapezoid(m)?;
            let mut num_f = 0.0;
            for ((&x, &w), &e) in points.iter().zip(&weights).zip(&exact_pts) {
                let d = quadrature_scalar(eval, contour, &rule, x)? - e;
                num_f += w * d * d;
            }
            let mut num_o = 0.0_f64;
            for (&x, &e) in modal.eigenvalues.iter().zip(&exact_eig) {
                num_o = num_o.max((quadrature_scalar(eval, contour, &rule, x)? - e).abs());
            }
            Ok(ErrorPoint {
                m,
                function_error: libm::sqrt(num_f / den_f),
                operator_error: num_o / den_o,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::laplacian_1d_dirichlet;

    fn unit() -> SpectralInterval {
        SpectralInterval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn contour_closes_and_rule_sums() {
        for c in [
            Contour::circle(5.0).unwrap(),
            Contour::ellipse(1.02, 0.07).unwrap(),
        ] {
            assert!((c.point(0.0) - c.point(2.0 * PI)).norm() < 1e-14);
        }
        let rule = QuadratureRule::trapezoid(37).unwrap();
        assert!((rule.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-13);
        assert!(QuadratureRule::trapezoid(0).is_err());
        assert!(Contour::circle(-1.0).is_err());
    }

    #[test]
    fn validation_cases() {
        let rep = validate_contour(&Contour::circle(5.0).unwrap(), &unit(), &[]).unwrap();
        assert!(rep.spectrum_margin >= 4.0 - 1e-9);
        let err = validate_contour(&Contour::circle(0.5).unwrap(), &unit(), &[]).unwrap_err();
        assert_eq!(err, Error::SpectrumNotEnclosed { point: 1.0 });
        let pole = Complex64::new(0.5, 0.01);
        assert!(matches!(
            validate_contour(&Contour::ellipse(1.02, 0.07).unwrap(), &unit(), &[pole]),
            Err(Error::PoleEnclosed { .. })
        ));
        let outside = Complex64::new(-0.01, 0.0);
        assert!(
            validate_contour(&Contour::ellipse(1.02, 0.07).unwrap(), &unit(), &[outside]).is_ok()
        );
    }

    #[test]
    fn identity_and_linear_symbols() {
        let op = laplacian_1d_dirichlet(40, PI).unwrap();
        let z: Vec<f64> = (0..op.dim())
            .map(|i| libm::sin(0.3 * i as f64) + 0.1)
            .collect();
        let c = Contour::circle(5.0).unwrap();
        let rule = QuadratureRule::trapezoid(16).unwrap();
        let one = RationalEntry::polynomial(vec![1.0]).unwrap();
        let out = realize_scalar(&one, &c, &rule, &op, &unit(), &z).unwrap();
        let err = rel(&out, &z);
        assert!(err <= 1e-8, "{err}");
        let id = RationalEntry::polynomial(vec![0.0, 1.0]).unwrap();
        let out = realize_scalar(&id, &c, &rule, &op, &unit(), &z).unwrap();
        let lz = op.apply_lambda(&z);
        assert!(rel(&out, &lz) <= 1e-8);
    }

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let n: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        let d: f64 = b.iter().map(|y| y * y).sum();
        libm::sqrt(n / d)
    }

    #[test]
    fn prepared_matches_direct() {
        let op = laplacian_1d_dirichlet(30, PI).unwrap();
        let z: Vec<f64> = (0..op.dim()).map(|i| libm::cos(0.2 * i as f64)).collect();
        let c = Contour::circle(3.0).unwrap();
        let rule = QuadratureRule::trapezoid(20).unwrap();
        let r = RationalMatrixFunction::new(
            1,
            2,
            vec![
                RationalEntry::polynomial(vec![0.5, 1.0, -0.3]).unwrap(),
                RationalEntry::new(vec![1.0], vec![1.0, 0.2]).unwrap(),
            ],
        )
        .unwrap();
        let zz = vec![z.clone(), z.iter().map(|v| 2.0 * v).collect()];
        let direct = realize(&r, &c, &rule, &op, &unit(), &zz).unwrap();
        let prepared = PreparedRealization::new(&r, &c, &rule, &op, &unit()).unwrap();
        let again = prepared.apply(&zz).unwrap();
        assert_eq!(direct.outputs, again.outputs);
    }

    #[test]
    fn shift_on_spectrum_is_reported() {
        let op = laplacian_1d_dirichlet(4, PI).unwrap();
        let modal = op.eigendecompose().unwrap();
        // A circle through the largest eigenvalue puts a node on it.
        let c = Contour::circle(modal.eigenvalues[2]).unwrap();
        let rule = QuadratureRule::trapezoid(4).unwrap();
        let one = RationalMatrixFunction::scalar(RationalEntry::polynomial(vec![1.0]).unwrap());
        let err = node_contribution(&one, &c, &rule, &op, &[vec![1.0; 3]], 0).unwrap_err();
        assert_eq!(err, Error::ShiftSingular { node: 0 });
    }

    #[test]
    fn error_curve_for_constant() {
        let op = laplacian_1d_dirichlet(20, PI).unwrap();
        let modal = op.eigendecompose().unwrap();
        let one = RationalEntry::polynomial(vec![1.0]).unwrap();
        let curve = realization_error_curve(
            &one,
            |_| 1.0,
            &Contour::circle(50.0).unwrap(),
            &modal,
            &ErrorGrid::Lgl(unit()),
            &[8, 16, 32],
        )
        .unwrap();
        assert!(curve
            .iter()
            .all(|p| p.function_error <= 1e-8 && p.operator_error <= 1e-8));
    }
}
