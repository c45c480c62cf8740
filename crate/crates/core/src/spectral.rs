//! Legendre basis, Legendre-Gauss-Lobatto quadrature and L² projection on a
//! spectral interval.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Nodes used by [`l2_relative_error`] and [`l2_norm`].
pub const NORM_QUADRATURE_NODES: usize = 128;

const LGL_NEWTON_TOL: f64 = 1e-14;
const LGL_NEWTON_MAX_ITER: usize = 100;

/// Interval `(sigma_min, sigma_max)` that contains the spectrum of `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralInterval {
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl SpectralInterval {
    pub fn new(sigma_min: f64, sigma_max: f64) -> Result<Self> {
        if !(sigma_min.is_finite() && sigma_max.is_finite() && sigma_min < sigma_max) {
            return Err(Error::invalid(
                "spectral interval needs sigma_min < sigma_max",
            ));
        }
        Ok(Self {
            sigma_min,
            sigma_max,
        })
    }

    pub fn length(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.sigma_min + self.sigma_max)
    }

    /// Maps `t ∈ [-1, 1]` to the interval.
    pub fn from_reference(&self, t: f64) -> f64 {
        self.midpoint() + 0.5 * self.length() * t
    }

    /// Maps a point of the interval to `[-1, 1]`.
    pub fn to_reference(&self, lambda: f64) -> f64 {
        (2.0 * lambda - self.sigma_min - self.sigma_max) / self.length()
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.sigma_min && lambda <= self.sigma_max
    }

    /// `n` equally spaced points including both endpoints.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![self.midpoint()],
            _ => (0..n)
                .map(|i| self.sigma_min + self.length() * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Value of the Legendre polynomial `P_k(x)` by the three-term recurrence.
pub fn legendre_eval(k: usize, x: f64) -> f64 {
    legendre_with_derivative(k, x).0
}

/// `(P_k(x), P_k'(x))`.
pub fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for j in 1..k {
        let jf = j as f64;
        let p_next = ((2.0 * jf + 1.0) * x * p - jf * p_prev) / (jf + 1.0);
        // P'_{j+1} = P'_{j-1} + (2j+1) P_j
        let d_next = d_prev + (2.0 * jf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// All of `P_0(x) .. P_n(x)`.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(x);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * out[j] - jf * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Legendre-Gauss-Lobatto rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LglRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LglRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        2 * self.len() - 3
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral over `interval` after the affine change of variables.
    pub fn integrate_on(&self, interval: &SpectralInterval, f: impl Fn(f64) -> f64) -> f64 {
        0.5 * interval.length() * self.integrate(|t| f(interval.from_reference(t)))
    }

    pub fn mapped_nodes(&self, interval: &SpectralInterval) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&t| interval.from_reference(t))
            .collect()
    }
}

/// `n`-point LGL rule: `±1` plus the roots of `P'_{n-1}`, exact up to degree `2n-3`.
pub fn lgl_rule(n: usize) -> Result<LglRule> {
    if n < 2 {
        return Err(Error::invalid("LGL rule needs at least two nodes"));
    }
    let deg = n - 1;
    let degf = deg as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    let half = (n - 2).div_ceil(2);
    for j in 1..=half {
        // Chebyshev-Gauss-Lobatto guess, ascending order.
        let mut x = -libm::cos(core::f64::consts::PI * j as f64 / degf);
        for _ in 0..LGL_NEWTON_MAX_ITER {
            let (p, dp) = legendre_with_derivative(deg, x);
            // (1 - x²) P'' = 2x P' - N(N+1) P
            let d2p = (2.0 * x * dp - degf * (degf + 1.0) * p) / (1.0 - x * x);
            let step = dp / d2p;
            x -= step;
            if step.abs() < LGL_NEWTON_TOL {
                break;
            }
        }
        nodes[j] = x;
        nodes[n - 1 - j] = -x;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let scale = 2.0 / (degf * (degf + 1.0));
    let weights = nodes
        .iter()
        .map(|&x| {
            let p = legendre_eval(deg, x);
            scale / (p * p)
        })
        .collect();
    Ok(LglRule { nodes, weights })
}

/// Polynomial in the Legendre basis on a spectral interval, possibly
/// matrix-valued with one coefficient vector per entry (row-major).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralFunction {
    pub interval: SpectralInterval,
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<Vec<f64>>,
}

impl SpectralFunction {
    pub fn scalar(interval: SpectralInterval, coeffs: Vec<f64>) -> Self {
        Self {
            interval,
            rows: 1,
            cols: 1,
            coeffs: vec![coeffs],
        }
    }

    pub fn zero(interval: SpectralInterval, degree: usize) -> Self {
        Self::scalar(interval, vec![0.0; degree + 1])
    }

    pub fn from_entries(
        interval: SpectralInterval,
        rows: usize,
        cols: usize,
        coeffs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if coeffs.len() != rows * cols || coeffs.iter().any(Vec::is_empty) {
            return Err(Error::invalid(
                "one non-empty coefficient vector per entry expected",
            ));
        }
        Ok(Self {
            interval,
            rows,
            cols,
            coeffs,
        })
    }

    /// Degree of the first entry.
    pub fn degree(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn entry_coeffs(&self, row: usize, col: usize) -> &[f64] {
        &self.coeffs[row * self.cols + col]
    }

    pub fn eval_entry(&self, row: usize, col: usize, lambda: f64) -> f64 {
        legendre_series(
            self.entry_coeffs(row, col),
            self.interval.to_reference(lambda),
        )
    }

    /// Value of a scalar function (entry `(0, 0)`).
    pub fn eval(&self, lambda: f64) -> f64 {
        self.eval_entry(0, 0, lambda)
    }

    /// L² norm of entry `(row, col)` over the interval, by Parseval.
    pub fn entry_l2_norm(&self, row: usize, col: usize) -> f64 {
        libm::sqrt(legendre_parseval(
            self.entry_coeffs(row, col),
            &self.interval,
        ))
    }

    pub fn l2_norm(&self) -> f64 {
        self.entry_l2_norm(0, 0)
    }

    /// L² distance between two scalar functions on the same interval.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        let n = self.coeffs[0].len().max(other.coeffs[0].len());
        let diff: Vec<f64> = (0..n)
            .map(|k| {
                self.coeffs[0].get(k).copied().unwrap_or(0.0)
                    - other.coeffs[0].get(k).copied().unwrap_or(0.0)
            })
            .collect();
        libm::sqrt(legendre_parseval(&diff, &self.interval))
    }
}

/// `Σ c_k P_k(t)`.
pub fn legendre_series(coeffs: &[f64], t: f64) -> f64 {
    // Clenshaw recurrence.
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (0..coeffs.len()).rev() {
        let kf = k as f64;
        let alpha = (2.0 * kf + 1.0) / (kf + 1.0) * t;
        let beta = -(kf + 1.0) / (kf + 2.0);
        let b0 = coeffs[k] + alpha * b1 + beta * b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// `‖Σ c_k P_k‖²` on the interval: `Σ c_k² · 2/(2k+1) · |I|/2`.
pub fn legendre_parseval(coeffs: &[f64], interval: &SpectralInterval) -> f64 {
    let half = 0.5 * interval.length();
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * c * 2.0 / (2.0 * k as f64 + 1.0) * half)
        .sum()
}

/// Number of LGL nodes used by [`project`] for degree `degree`.
pub fn projection_nodes(degree: usize) -> usize {
    (2 * degree + 2).max(64)
}

/// L²-orthogonal projection of `f` onto polynomials of degree `degree`.
pub fn project(
    f: impl Fn(f64) -> f64,
    interval: SpectralInterval,
    degree: usize,
) -> Result<SpectralFunction> {
    let rule = lgl_rule(projection_nodes(degree))?;
    let mut samples = Vec::with_capacity(rule.len());
    for &t in &rule.nodes {
        let lambda = interval.from_reference(t);
        let v = f(lambda);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                location: lambda,
                what: "projection sample".into(),
            });
        }
        samples.push(v);
    }
    let mut coeffs = vec![0.0; degree + 1];
    for (i, &t) in rule.nodes.iter().enumerate() {
        let basis = legendre_all(degree, t);
        let wf = rule.weights[i] * samples[i];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += wf * basis[k];
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2.0 * k as f64 + 1.0) / 2.0;
    }
    Ok(SpectralFunction::scalar(interval, coeffs))
}

/// `‖f‖_{L²(I)}` with an LGL rule of [`NORM_QUADRATURE_NODES`] nodes.
pub fn l2_norm(f: impl Fn(f64) -> f64, interval: &SpectralInterval) -> f64 {
    let rule = lgl_rule(NORM_QUADRATURE_NODES).expect("fixed node count");
    libm::sqrt(rule.integrate_on(interval, |x| {
        let v = f(x);
        v * v
    }))
}

/// `‖f - g‖ / ‖g‖` in `L²(I)`.
pub fn l2_relative_error(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    interval: &SpectralInterval,
) -> Result<f64> {
    let rule = lgl_rule(NORM_QUADRATURE_NODES)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = interval.from_reference(t);
        let gv = g(x);
        let d = f(x) - gv;
        num += w * d * d;
        den += w * gv * gv;
    }
    if den == 0.0 {
        return Err(Error::DivisionDegenerate);
    }
    Ok(libm::sqrt(num / den))
}
