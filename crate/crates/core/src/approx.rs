//! Polynomial and rational approximants of gain symbols in the monomial basis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{SpectralFunction, SpectralInterval};

/// Highest degree accepted by the Legendre-to-monomial conversion.
pub const MAX_MONOMIAL_DEGREE: usize = 30;
/// Grid size of the pole-free check on the spectral interval.
pub const POLE_CHECK_GRID: usize = 1000;
/// Relative denominator size below which the pole-free check fails.
pub const POLE_CHECK_RTOL: f64 = 1e-8;
/// Singular values below this fraction of the largest count towards the null space.
pub const NULLITY_RTOL: f64 = 1e-16;

/// One entry `Σ num_k λᵏ / Σ den_k λᵏ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RationalEntry {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// Which denominator coefficient is fixed to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    ConstantTerm,
    LeadingTerm,
    None,
}

impl RationalEntry {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(Error::invalid(
                "numerator and denominator need at least one coefficient",
            ));
        }
        if den.iter().all(|d| *d == 0.0) {
            return Err(Error::invalid("denominator is identically zero"));
        }
        Ok(Self { num, den })
    }

    pub fn polynomial(num: Vec<f64>) -> Result<Self> {
        Self::new(num, vec![1.0])
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.num.len() - 1, self.den.len() - 1)
    }

    pub fn normalization(&self) -> Normalization {
        if self.den[0] == 1.0 {
            Normalization::ConstantTerm
        } else if self.den.last() == Some(&1.0) {
            Normalization::LeadingTerm
        } else {
            Normalization::None
        }
    }

    /// Divides both polynomials by the constant denominator term, or the
    /// leading one when the constant term is negligible.
    pub fn normalized(&self) -> Self {
        let dmax = self.den.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let pivot = if self.den[0].abs() > 1e-14 * dmax {
            self.den[0]
        } else {
            *self
                .den
                .iter()
                .rev()
                .find(|d| **d != 0.0)
                .expect("nonzero denominator")
        };
        Self {
            num: self.num.iter().map(|c| c / pivot).collect(),
            den: self.den.iter().map(|c| c / pivot).collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.num, x) / horner(&self.den, x)
    }

    pub fn eval_complex(&self, xi: Complex64) -> Result<Complex64> {
        let d = horner_c(&self.den, xi);
        if d.norm() < 1e-300 {
            return Err(Error::PoleEvaluation { at: xi });
        }
        Ok(horner_c(&self.num, xi) / d)
    }

    /// Roots of the denominator.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        polynomial_roots(&self.den)
    }
}

pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

pub fn horner_c(c: &[f64], x: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &k| acc * x + k)
}

/// Roots of `Σ c_k xᵏ` from the companion matrix, polished by Newton steps.
pub fn polynomial_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let deg = match c.iter().rposition(|v| *v != 0.0) {
        Some(d) => d,
        None => return Err(Error::invalid("zero polynomial has no isolated roots")),
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    let eig = crate::dense::eigenvalues(&comp)
        .ok_or_else(|| Error::NumericFailure("companion eigenvalues did not converge".into()))?;
    let deriv: Vec<f64> = (1..=deg).map(|k| k as f64 * c[k]).collect();
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut roots = Vec::with_capacity(deg);
    for z in eig.iter() {
        let mut r = *z;
        for _ in 0..5 {
            let d = horner_c(&deriv, r);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner_c(&c[..=deg], r) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            r -= step;
        }
        let keep = if horner_c(&c[..=deg], r).norm() <= horner_c(&c[..=deg], *z).norm() {
            r
        } else {
            *z
        };
        if horner_c(&c[..=deg], keep).norm()
            > 1e-8 * scale * libm::pow(1.0 + keep.norm(), deg as f64)
        {
            return Err(Error::NumericFailure(format!(
                "root {keep} has a large residual"
            )));
        }
        roots.push(keep);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// Matrix of rational functions, entries in row-major order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RationalMatrixFunction {
    pub shape: [usize; 2],
    pub entries: Vec<RationalEntry>,
}

impl RationalMatrixFunction {
    pub fn new(rows: usize, cols: usize, entries: Vec<RationalEntry>) -> Result<Self> {
        if rows * cols != entries.len() || entries.is_empty() {
            return Err(Error::invalid("entry count does not match the shape"));
        }
        Ok(Self {
            shape: [rows, cols],
            entries,
        })
    }

    pub fn scalar(entry: RationalEntry) -> Self {
        Self {
            shape: [1, 1],
            entries: vec![entry],
        }
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn entry(&self, row: usize, col: usize) -> &RationalEntry {
        &self.entries[row * self.shape[1] + col]
    }

    pub fn eval(&self, x: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows(), self.cols(), |i, j| self.entry(i, j).eval(x))
    }

    pub fn eval_complex(&self, xi: Complex64) -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::zeros(self.rows(), self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out[(i, j)] = self.entry(i, j).eval_complex(xi)?;
            }
        }
        Ok(out)
    }

    /// Denominator roots per entry; empty for polynomial entries.
    pub fn poles(&self) -> Result<Vec<Vec<Complex64>>> {
        self.entries.iter().map(RationalEntry::poles).collect()
    }

    /// Fails when a denominator nearly vanishes on a uniform grid of `interval`.
    pub fn check_pole_free(&self, interval: &SpectralInterval) -> Result<()> {
        let grid = interval.uniform_grid(POLE_CHECK_GRID);
        for e in &self.entries {
            let vals: Vec<f64> = grid.iter().map(|&x| horner(&e.den, x)).collect();
            let max = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if let Some((k, _)) = vals
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.abs() > POLE_CHECK_RTOL * max))
            {
                return Err(Error::PoleInInterval {
                    pole: Complex64::new(grid[k], 0.0),
                });
            }
            for z in e.poles()? {
                if z.im.abs() <= 1e-10 * (1.0 + z.re.abs()) && interval.contains(z.re) {
                    return Err(Error::PoleInInterval { pole: z });
                }
            }
        }
        Ok(())
    }
}

/// Samples of a matrix-valued function at increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub lambdas: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
}

impl SampleSet {
    pub fn new(lambdas: Vec<f64>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if lambdas.len() != values.len() || lambdas.is_empty() {
            return Err(Error::invalid("one value per node expected"));
        }
        if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("sample nodes must be strictly increasing"));
        }
        let shape = values[0].shape();
        for (l, v) in lambdas.iter().zip(&values) {
            if v.shape() != shape {
                return Err(Error::invalid("sample values differ in shape"));
            }
            if !l.is_finite() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Evaluation {
                    location: *l,
                    what: "sample value".into(),
                });
            }
        }
        Ok(Self { lambdas, values })
    }

    pub fn from_fn(lambdas: Vec<f64>, f: impl Fn(f64) -> DMatrix<f64>) -> Result<Self> {
        let values = lambdas.iter().map(|&l| f(l)).collect();
        Self::new(lambdas, values)
    }

    pub fn scalar(lambdas: Vec<f64>, ys: &[f64]) -> Result<Self> {
        let values = ys.iter().map(|&y| DMatrix::from_element(1, 1, y)).collect();
        Self::new(lambdas, values)
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    fn entry_values(&self, i: usize, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[(i, j)]).collect()
    }
}

/// `n` points `10^t`, `t` uniformly spaced from `lo_exp` to `hi_exp` inclusive.
pub fn logspace(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![libm::pow(10.0, lo_exp)];
    }
    (0..n)
        .map(|k| libm::pow(10.0, lo_exp + (hi_exp - lo_exp) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Converts a Legendre-basis function to monomial coefficients in `λ`.
pub fn legendre_to_monomial(f: &SpectralFunction) -> Result<RationalMatrixFunction> {
    let degree = f.degree();
    if degree > MAX_MONOMIAL_DEGREE {
        return Err(Error::Conditioning {
            degree,
            max: MAX_MONOMIAL_DEGREE,
        });
    }
    let iv = f.interval;
    // t = αλ + β maps the interval onto [−1, 1].
    let alpha = 2.0 / iv.length();
    let beta = -(iv.sigma_min + iv.sigma_max) / iv.length();
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0]];
    if degree >= 1 {
        basis.push(vec![beta, alpha]);
    }
    for k in 1..degree {
        let (pk, pkm1) = (&basis[k], &basis[k - 1]);
        let mut next = vec![0.0; k + 2];
        for (m, c) in pk.iter().enumerate() {
            next[m] += (2 * k + 1) as f64 * beta * c;
            next[m + 1] += (2 * k + 1) as f64 * alpha * c;
        }
        for (m, c) in pkm1.iter().enumerate() {
            next[m] -= k as f64 * c;
        }
        next.iter_mut().for_each(|v| *v /= (k + 1) as f64);
        basis.push(next);
    }
    let entries = f
        .coeffs
        .iter()
        .map(|coeffs| {
            let mut num = vec![0.0; degree + 1];
            for (k, c) in coeffs.iter().enumerate() {
                for (m, b) in basis[k].iter().enumerate() {
                    num[m] += c * b;
                }
            }
            RationalEntry::polynomial(num)
        })
        .collect::<Result<Vec<_>>>()?;
    RationalMatrixFunction::new(f.rows, f.cols, entries)
}

/// Least-squares polynomial fit of each entry.
pub fn fit_polynomial(samples: &SampleSet, degree: usize) -> Result<RationalMatrixFunction> {
    if degree > MAX_MONOMIAL_DEGREE {
        return Err(Error::Conditioning {
            degree,
            max: MAX_MONOMIAL_DEGREE,
        });
    }
    if samples.len() < degree + 2 {
        return Err(Error::invalid(format!(
            "{} samples cannot determine a degree-{degree} fit",
            samples.len()
        )));
    }
    let (rows, cols) = samples.shape();
    let mut entries = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let y = samples.entry_values(i, j);
            let (mut v, scales) = scaled_vandermonde(&samples.lambdas, degree, None);
            let svd = core::mem::take(&mut v).svd(true, true);
            let c = svd
                .solve(&DVector::from_vec(y), 1e-15)
                .map_err(|e| Error::NumericFailure(e.into()))?;
            let num = c.iter().zip(&scales).map(|(c, s)| c / s).collect();
            entries.push(RationalEntry::polynomial(num)?);
        }
    }
    RationalMatrixFunction::new(rows, cols, entries)
}

/// Columns `λᵏ` (and `−y λᵏ` when `y` is given), each scaled to unit norm.
fn scaled_vandermonde(
    x: &[f64],
    degree: usize,
    y: Option<(&[f64], usize)>,
) -> (DMatrix<f64>, Vec<f64>) {
    let extra = y.map_or(0, |(_, d)| d + 1);
    let cols = degree + 1 + extra;
    let mut m = DMatrix::<f64>::zeros(x.len(), cols);
    for (r, &l) in x.iter().enumerate() {
        let mut p = 1.0;
        for k in 0..=degree {
            m[(r, k)] = p;
            p *= l;
        }
        if let Some((ys, d)) = y {
            let mut p = 1.0;
            for k in 0..=d {
                m[(r, degree + 1 + k)] = -ys[r] * p;
                p *= l;
            }
        }
    }
    let mut scales = Vec::with_capacity(cols);
    for c in 0..cols {
        let n = m.column(c).norm();
        let s = if n > 0.0 { n } else { 1.0 };
        m.column_mut(c).unscale_mut(s);
        scales.push(s);
    }
    (m, scales)
}

/// Singular-value diagnostics of one rational fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// Smallest over largest singular value of the scaled system.
    pub sigma_ratio: f64,
    /// Second smallest over largest singular value.
    pub sigma_next_ratio: f64,
    pub nullity: usize,
}

/// Linearized least-squares rational fit of every entry.
///
/// Solves `Σ d_m λ_nᵐ − k(λ_n) Σ d'_m λ_nᵐ = 0` by taking the right singular
/// vector of the smallest singular value of the column-scaled system.
pub fn fit_rational_ls(
    samples: &SampleSet,
    degrees: (usize, usize),
    interval: &SpectralInterval,
) -> Result<RationalMatrixFunction> {
    fit_rational_ls_with_diagnostics(samples, degrees, interval).map(|(r, _)| r)
}

pub fn fit_rational_ls_with_diagnostics(
    samples: &SampleSet,
    degrees: (usize, usize),
    interval: &SpectralInterval,
) -> Result<(RationalMatrixFunction, Vec<FitDiagnostics>)> {
    let (nn, nd) = degrees;
    if nn.max(nd) > MAX_MONOMIAL_DEGREE {
        return Err(Error::Conditioning {
            degree: nn.max(nd),
            max: MAX_MONOMIAL_DEGREE,
        });
    }
    if samples.len() <= nn + nd + 2 {
        return Err(Error::invalid(format!(
            "{} samples do not over-determine degrees ({nn}, {nd})",
            samples.len()
        )));
    }
    let (rows, cols) = samples.shape();
    let mut entries = Vec::with_capacity(rows * cols);
    let mut diags = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let y = samples.entry_values(i, j);
            let (m, scales) = scaled_vandermonde(&samples.lambdas, nn, Some((&y, nd)));
            let svd = m.svd(false, true);
            let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
            let sv = &svd.singular_values;
            let smax = sv.max();
            let kmin = sv.imin();
            let nullity = sv.iter().filter(|s| **s <= NULLITY_RTOL * smax).count();
            let mut sorted: Vec<f64> = sv.iter().copied().collect();
            sorted.sort_by(f64::total_cmp);
            let sigma_next_ratio = sorted.get(1).map_or(f64::INFINITY, |s| s / smax);
            if nullity > 1 {
                return Err(Error::AmbiguousFit { nullity });
            }
            let c: Vec<f64> = v_t
                .row(kmin)
                .iter()
                .zip(&scales)
                .map(|(c, s)| c / s)
                .collect();
            let num = c[..=nn].to_vec();
            let den = c[nn + 1..].to_vec();
            let entry = RationalEntry::new(num, den)?.normalized();
            entries.push(entry);
            diags.push(FitDiagnostics {
                sigma_ratio: sv[kmin] / smax,
                sigma_next_ratio,
                nullity,
            });
        }
    }
    let r = RationalMatrixFunction::new(rows, cols, entries)?;
    r.check_pole_free(interval)?;
    Ok((r, diags))
}

/// Largest entrywise `|f − r|` on a uniform grid of `interval`.
pub fn sup_error(
    f: impl Fn(f64) -> DMatrix<f64>,
    r: &RationalMatrixFunction,
    interval: &SpectralInterval,
    grid_size: usize,
) -> Result<f64> {
    if grid_size < 100 {
        return Err(Error::invalid("sup error needs at least 100 grid points"));
    }
    Ok(interval
        .uniform_grid(grid_size)
        .iter()
        .map(|&x| (f(x) - r.eval(x)).abs().max())
        .fold(0.0, f64::max))
}

/// `‖r − f‖₂ / ‖f‖₂` over the grid values of entry `(row, col)`.
pub fn grid_relative_error(f: impl Fn(f64) -> f64, r: &RationalEntry, grid: &[f64]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in grid {
        let fv = f(x);
        let d = r.eval(x) - fv;
        num += d * d;
        den += fv * fv;
    }
    if den == 0.0 {
        return Err(Error::DivisionDegenerate);
    }
    Ok(libm::sqrt(num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::project;

    fn unit() -> SpectralInterval {
        SpectralInterval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn legendre_conversion_simple() {
        let half = project(|l| l / 2.0, unit(), 1).unwrap();
        let r = legendre_to_monomial(&half).unwrap();
        let e = r.entry(0, 0);
        assert!(e.num[0].abs() < 1e-15 && (e.num[1] - 0.5).abs() < 1e-15);
        assert_eq!(e.den, vec![1.0]);
        let three = project(|_| 3.0, unit(), 0).unwrap();
        let r = legendre_to_monomial(&three).unwrap();
        assert!((r.entry(0, 0).num[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_conversion_matches_series() {
        let iv = SpectralInterval::new(0.0, 1.0).unwrap();
        let f = project(|l| libm::exp(-l) * libm::cos(3.0 * l), iv, 10).unwrap();
        let r = legendre_to_monomial(&f).unwrap();
        for x in iv.uniform_grid(200) {
            assert!((r.eval(x)[(0, 0)] - f.eval(x)).abs() < 1e-9);
        }
        let big = SpectralFunction::zero(iv, 31);
        assert!(matches!(
            legendre_to_monomial(&big),
            Err(Error::Conditioning { .. })
        ));
    }

    #[test]
    fn complex_evaluation() {
        let id = RationalMatrixFunction::scalar(RationalEntry::polynomial(vec![0.0, 1.0]).unwrap());
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(id.eval_complex(i).unwrap()[(0, 0)], i);
        let two = RationalEntry::polynomial(vec![2.0]).unwrap();
        assert_eq!(
            two.eval_complex(Complex64::new(3.0, -1.0)).unwrap(),
            Complex64::new(2.0, 0.0)
        );
        let pole = RationalEntry::new(vec![1.0], vec![-0.5, 1.0]).unwrap();
        assert!(matches!(
            pole.eval_complex(Complex64::new(0.5, 0.0)),
            Err(Error::PoleEvaluation { .. })
        ));
    }

    #[test]
    fn roots_of_simple_denominators() {
        let r = polynomial_roots(&[-0.5, 1.0]).unwrap();
        assert!((r[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let r = polynomial_roots(&[1.0, 0.0, 1.0]).unwrap();
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!(polynomial_roots(&[2.0]).unwrap().is_empty());
    }

    #[test]
    fn exact_polynomial_recovery() {
        let x = unit().uniform_grid(30);
        let y: Vec<f64> = x.iter().map(|l| l * l).collect();
        let s = SampleSet::scalar(x.clone(), &y).unwrap();
        let r = fit_rational_ls(&s, (2, 0), &unit()).unwrap();
        let e = &r.entries[0];
        assert!(e
            .num
            .iter()
            .zip([0.0, 0.0, 1.0])
            .all(|(a, b)| (a - b).abs() < 1e-12));
        let p = fit_polynomial(&s, 2).unwrap();
        assert!(x.iter().all(|&l| (p.eval(l)[(0, 0)] - l * l).abs() < 1e-12));
    }

    #[test]
    fn simple_pole_recovery() {
        let x = logspace(-2.0, 0.0, 50);
        let y: Vec<f64> = x.iter().map(|l| 1.0 / (l + 0.1)).collect();
        let s = SampleSet::scalar(x.clone(), &y).unwrap();
        let r = fit_rational_ls(&s, (0, 1), &unit()).unwrap();
        let e = &r.entries[0];
        assert!((e.num[0] - 10.0).abs() < 1e-10);
        assert!((e.den[1] - 10.0).abs() < 1e-10);
        assert!(grid_relative_error(|l| 1.0 / (l + 0.1), e, &x).unwrap() < 1e-12);
    }

    #[test]
    fn two_pole_recovery() {
        let x = logspace(-2.0, 0.0, 60);
        let y: Vec<f64> = x.iter().map(|l| 1.0 / ((l + 0.2) * (l + 0.3))).collect();
        let s = SampleSet::scalar(x, &y).unwrap();
        let r = fit_rational_ls(&s, (0, 2), &unit()).unwrap();
        let poles = r.poles().unwrap();
        assert!((poles[0][0] - Complex64::new(-0.3, 0.0)).norm() < 1e-8);
        assert!((poles[0][1] - Complex64::new(-0.2, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn pole_inside_interval_is_rejected() {
        let x = unit().uniform_grid(40);
        let y: Vec<f64> = x.iter().map(|l| 1.0 / (l - 0.5037)).collect();
        let s = SampleSet::scalar(x, &y).unwrap();
        assert!(matches!(
            fit_rational_ls(&s, (0, 1), &unit()),
            Err(Error::PoleInInterval { .. })
        ));
    }

    #[test]
    fn rank_deficient_fit_is_ambiguous() {
        let x = unit().uniform_grid(30);
        let y: Vec<f64> = x.iter().map(|l| 2.0 * l).collect();
        let s = SampleSet::scalar(x, &y).unwrap();
        assert!(matches!(
            fit_rational_ls(&s, (2, 1), &unit()),
            Err(Error::AmbiguousFit { .. })
        ));
    }

    #[test]
    fn underdetermined_fit_rejected() {
        let x = unit().uniform_grid(5);
        let s = SampleSet::scalar(x, &[1.0; 5]).unwrap();
        assert!(matches!(
            fit_rational_ls(&s, (2, 1), &unit()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sup_error_offsets() {
        let r = RationalMatrixFunction::scalar(
            RationalEntry::new(vec![1.0, 2.0], vec![1.0, 0.5]).unwrap(),
        );
        let same = sup_error(|x| r.eval(x), &r, &unit(), 100).unwrap();
        assert!(same <= 1e-13);
        let off = sup_error(|x| r.eval(x).add_scalar(0.01), &r, &unit(), 100).unwrap();
        assert!((off - 0.01).abs() < 1e-12);
    }

    #[test]
    fn logspace_endpoints() {
        let g = logspace(-2.0, 0.0, 100);
        assert_eq!(g.len(), 100);
        assert!((g[0] - 0.01).abs() < 1e-16 && (g[99] - 1.0).abs() < 1e-15);
    }
}
