//! Parametric algebraic Riccati equations and their spectral Galerkin
//! approximation.
//!
//! For each value of the spectral parameter `λ` the gain symbol comes from
//! `aᵀp + pa − p b s⁻¹ bᵀ p + cᵀc = 0`. With scalar isomorphism functions
//! `(φ_V, φ_V', φ_Z)` the quadratic term is scaled by `φ_V / φ_V'`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{legendre_all, lgl_rule, SpectralFunction, SpectralInterval};

pub type MatrixFn = Box<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;
pub type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar isomorphism functions of the unbounded-control variant.
pub struct Isomorphisms {
    pub phi_v: ScalarFn,
    pub phi_v_dual: ScalarFn,
    pub phi_z: ScalarFn,
}

impl core::fmt::Debug for Isomorphisms {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("Isomorphisms { .. }")
    }
}

/// Symbols `a, b, c, s` of a parametric LQR problem.
pub struct ParametricLQR {
    pub n_z: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub a: MatrixFn,
    pub b: MatrixFn,
    pub c: MatrixFn,
    pub s: MatrixFn,
    pub interval: SpectralInterval,
    pub iso: Option<Isomorphisms>,
}

impl core::fmt::Debug for ParametricLQR {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ParametricLQR")
            .field("n_z", &self.n_z)
            .field("n_u", &self.n_u)
            .field("n_y", &self.n_y)
            .field("interval", &self.interval)
            .field("iso", &self.iso)
            .finish()
    }
}

impl ParametricLQR {
    /// Checks symbol shapes at the interval midpoint.
    pub fn new(
        a: MatrixFn,
        b: MatrixFn,
        c: MatrixFn,
        s: MatrixFn,
        interval: SpectralInterval,
        iso: Option<Isomorphisms>,
    ) -> Result<Self> {
        let mid = interval.midpoint();
        let (am, bm, cm, sm) = (a(mid), b(mid), c(mid), s(mid));
        let n_z = am.nrows();
        let n_u = bm.ncols();
        let n_y = cm.nrows();
        let shapes_ok = am.ncols() == n_z
            && bm.nrows() == n_z
            && cm.ncols() == n_z
            && sm.nrows() == n_u
            && sm.ncols() == n_u;
        if !shapes_ok || n_z == 0 || n_u == 0 {
            return Err(Error::InvalidSpec(format!(
                "inconsistent symbol shapes a {}x{}, b {}x{}, c {}x{}, s {}x{}",
                am.nrows(),
                am.ncols(),
                bm.nrows(),
                bm.ncols(),
                cm.nrows(),
                cm.ncols(),
                sm.nrows(),
                sm.ncols()
            )));
        }
        Ok(Self {
            n_z,
            n_u,
            n_y,
            a,
            b,
            c,
            s,
            interval,
            iso,
        })
    }

    /// Scalar symbols, all `1×1`.
    pub fn scalar(
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
        c: impl Fn(f64) -> f64 + Send + Sync + 'static,
        s: impl Fn(f64) -> f64 + Send + Sync + 'static,
        interval: SpectralInterval,
        iso: Option<Isomorphisms>,
    ) -> Result<Self> {
        let wrap = |f: Box<dyn Fn(f64) -> f64 + Send + Sync>| -> MatrixFn {
            Box::new(move |l| DMatrix::from_element(1, 1, f(l)))
        };
        Self::new(
            wrap(Box::new(a)),
            wrap(Box::new(b)),
            wrap(Box::new(c)),
            wrap(Box::new(s)),
            interval,
            iso,
        )
    }

    /// Scale of the quadratic term: `φ_V / φ_V'`, or 1.
    pub fn quadratic_scale(&self, lambda: f64) -> f64 {
        match &self.iso {
            Some(iso) => (iso.phi_v)(lambda) / (iso.phi_v_dual)(lambda),
            None => 1.0,
        }
    }

    fn s_inverse(&self, lambda: f64) -> Result<DMatrix<f64>> {
        let s = (self.s)(lambda);
        let chol = Cholesky::new(s).ok_or_else(|| {
            Error::InvalidSpec(format!("s is not symmetric positive definite at {lambda}"))
        })?;
        Ok(chol.inverse())
    }

    /// Returns `(a, G, Q)` with `G = scale · b s⁻¹ bᵀ` and `Q = cᵀc`.
    pub fn riccati_data(&self, lambda: f64) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let a = (self.a)(lambda);
        let b = (self.b)(lambda);
        let c = (self.c)(lambda);
        let g = &b * self.s_inverse(lambda)? * b.transpose() * self.quadratic_scale(lambda);
        let q = c.transpose() * &c;
        let finite = a
            .iter()
            .chain(g.iter())
            .chain(q.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Evaluation {
                location: lambda,
                what: "Riccati symbols".into(),
            });
        }
        Ok((a, g, q))
    }
}

/// Stabilizing solution of the Riccati equation at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArePointSolution {
    pub lambda: f64,
    pub p: DMatrix<f64>,
    pub residual_norm: f64,
}

/// Frobenius norm of `aᵀp + pa − p G p + Q`.
pub fn riccati_residual(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    q: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> f64 {
    (a.transpose() * p + p * a - p * g * p + q).norm()
}

/// Solves `Fᵀ X + X F = −C` through its Kronecker form.
pub fn lyapunov(f: &DMatrix<f64>, c: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = f.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let ft = f.transpose();
    let k = id.kronecker(&ft) + ft.kronecker(&id);
    let rhs = -DMatrix::from_column_slice(n * n, 1, c.as_slice());
    let x = k.lu().solve(&rhs)?;
    Some(DMatrix::from_column_slice(n, n, x.as_slice()))
}

const NEWTON_MAX_ITER: usize = 60;
const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = -1e-10;

/// Pointwise stabilizing solution, initialized by the Hamiltonian method.
pub fn are_pointwise(spec: &ParametricLQR, lambda: f64, tol: f64) -> Result<ArePointSolution> {
    are_pointwise_from(spec, lambda, tol, None)
}

/// Pointwise solution warm-started from `guess` when it is stabilizing.
pub fn are_pointwise_from(
    spec: &ParametricLQR,
    lambda: f64,
    tol: f64,
    guess: Option<&DMatrix<f64>>,
) -> Result<ArePointSolution> {
    if !(lambda.is_finite()) {
        return Err(Error::invalid("lambda must be finite"));
    }
    let (a, g, q) = spec.riccati_data(lambda)?;
    let start = match guess {
        Some(p) if p.nrows() == a.nrows() && is_stable(&(&a - &g * p)) => p.clone(),
        _ => hamiltonian_solution(&a, &g, &q).ok_or(Error::SolverFailure { lambda })?,
    };
    let p = newton_kleinman(&a, &g, &q, start, tol, lambda)?;
    let residual_norm = riccati_residual(&a, &g, &q, &p);
    let sym = (&p - p.transpose()).norm();
    let min_eig = crate::dense::symmetric_eigen(p.clone())
        .ok_or(Error::SolverFailure { lambda })?
        .eigenvalues
        .min();
    if sym > SYMMETRY_TOL || min_eig < PSD_TOL || !is_stable(&(&a - &g * &p)) {
        return Err(Error::SolverFailure { lambda });
    }
    Ok(ArePointSolution {
        lambda,
        p,
        residual_norm,
    })
}

fn newton_kleinman(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    q: &DMatrix<f64>,
    mut p: DMatrix<f64>,
    tol: f64,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let mut trace = Vec::new();
    let mut res = riccati_residual(a, g, q, &p);
    trace.push(res);
    let mut stalled = 0;
    let mut iterations = 0;
    while res > tol {
        if iterations == NEWTON_MAX_ITER || stalled >= 3 {
            return Err(Error::ConvergenceFailure { iterations, trace });
        }
        iterations += 1;
        let f = a - g * &p;
        let rhs = &p * g * &p + q;
        let next = lyapunov(&f, &rhs).ok_or(Error::SolverFailure { lambda })?;
        let next = (&next + next.transpose()) * 0.5;
        let next_res = riccati_residual(a, g, q, &next);
        if !next_res.is_finite() {
            return Err(Error::SolverFailure { lambda });
        }
        if next_res >= 0.5 * res {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if next_res <= res {
            p = next;
            res = next_res;
        } else {
            stalled += 1;
        }
        trace.push(res);
    }
    Ok(p)
}

/// All eigenvalues in the open left half plane.
pub fn is_stable(m: &DMatrix<f64>) -> bool {
    crate::dense::eigenvalues(m).is_some_and(|ev| ev.iter().all(|z| z.re < 0.0))
}

/// `P = Re(U₂ U₁⁻¹)` from the stable invariant subspace `[U₁; U₂]` of the
/// Hamiltonian `[[a, −G], [−Q, −aᵀ]]`.
pub fn hamiltonian_solution(
    a: &DMatrix<f64>,
    g: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    let scale = h.abs().max().max(1.0);
    let mut stable: Vec<Complex64> = crate::dense::eigenvalues(&h)?
        .into_iter()
        .filter(|z| z.re < -1e-12 * scale)
        .collect();
    if stable.len() != n {
        return None;
    }
    stable.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let hc = h.map(|v| Complex64::new(v, 0.0));
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && (stable[j] - stable[i]).norm() <= 1e-6 * (1.0 + stable[i].norm()) {
            j += 1;
        }
        let cluster = &stable[i..j];
        let mean =
            cluster.iter().fold(Complex64::new(0.0, 0.0), |s, z| s + z) / cluster.len() as f64;
        let delta = 1e-9 * (1.0 + mean.norm());
        let shift = mean + Complex64::new(delta, 0.3 * delta);
        let m = &hc - DMatrix::<Complex64>::identity(2 * n, 2 * n) * shift;
        let lu = m.lu();
        let k = j - i;
        let mut x = DMatrix::<Complex64>::from_fn(2 * n, k, |r, c| {
            let t = 0.7 * ((r + 1) * (c + i + 1)) as f64;
            Complex64::new(libm::cos(t), libm::sin(1.3 * t))
        });
        for _ in 0..3 {
            x = lu.solve(&x)?;
            x = x.qr().q();
        }
        for c in 0..k {
            basis.push(x.column(c).into_owned());
        }
        i = j;
    }
    let u = DMatrix::from_columns(&basis);
    let u1 = u.rows(0, n).into_owned();
    let u2 = u.rows(n, n).into_owned();
    let p = u2 * u1.try_inverse()?;
    let pr = p.map(|z| z.re);
    if pr.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((&pr + pr.transpose()) * 0.5)
}

/// Gain symbol `s⁻¹ bᵀ p`, or `bᵀ p φ_V / φ_V'²` for the unbounded variant.
pub fn gain_pointwise(spec: &ParametricLQR, sol: &ArePointSolution) -> Result<DMatrix<f64>> {
    let lambda = sol.lambda;
    let b = (spec.b)(lambda);
    match &spec.iso {
        Some(iso) => {
            let v = (iso.phi_v)(lambda);
            let vd = (iso.phi_v_dual)(lambda);
            if vd == 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "phi_v_dual vanishes at {lambda}"
                )));
            }
            Ok(b.transpose() * &sol.p * (v / (vd * vd)))
        }
        None => Ok(spec.s_inverse(lambda)? * b.transpose() * &sol.p),
    }
}

/// The two built-in weak forms solved by [`galerkin_semi_implicit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WeakForm {
    /// `∫(λp² + 2p − λ)η = 0`, linearized as `∫p⁺(λp + 2)η = ∫λη`.
    Example1Scalar,
    /// `∫(λk₁² + 2k₁ − 1)η₁ = 0` and `∫(k₂² − 2k₁)η₂ = 0`, linearized as
    /// `∫k₁⁺(λk₁ + 2)η₁ = ∫η₁` and `∫k₂⁺(k₂ + 1)η₂ = ∫(2k₁⁺ + k₂)η₂`.
    Example3Coupled,
}

impl WeakForm {
    pub fn components(self) -> usize {
        match self {
            WeakForm::Example1Scalar => 1,
            WeakForm::Example3Coupled => 2,
        }
    }
}

/// Iterates and diagnostics from [`galerkin_semi_implicit`].
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinOutput {
    pub functions: Vec<SpectralFunction>,
    /// Largest component difference `‖p^{m+1} − p^m‖` per iteration.
    pub trace: Vec<f64>,
    pub component_traces: Vec<Vec<f64>>,
    pub iterations: usize,
}

/// Default stop threshold of the semi-implicit iteration.
pub const GALERKIN_EPS: f64 = 1e-12;
pub const GALERKIN_MAX_ITER: usize = 200;

/// Semi-implicit Legendre–Galerkin iteration.
///
/// Each step freezes the nonlinearity at the previous iterate and solves a
/// dense Galerkin system assembled with an LGL rule of `2N + 2` nodes, which
/// integrates every product in the linearized forms exactly.
pub fn galerkin_semi_implicit(
    form: WeakForm,
    degrees: &[usize],
    initial: &[SpectralFunction],
    eps: f64,
    max_iter: usize,
) -> Result<GalerkinOutput> {
    let m = form.components();
    if degrees.len() != m || initial.len() != m {
        return Err(Error::invalid(format!(
            "weak form needs {m} degrees and initial guesses"
        )));
    }
    let interval = initial[0].interval;
    if initial
        .iter()
        .any(|f| f.interval != interval || f.rows * f.cols != 1)
    {
        return Err(Error::invalid(
            "initial guesses must be scalar on one interval",
        ));
    }
    let mut current: Vec<SpectralFunction> = initial
        .iter()
        .zip(degrees)
        .map(|(f, &d)| resized(f, d))
        .collect();
    let nodes = 2 * degrees.iter().copied().max().unwrap_or(0) + 2;
    let rule = lgl_rule(nodes.max(2))?;
    let half = 0.5 * interval.length();
    let lambdas = rule.mapped_nodes(&interval);
    let bases: Vec<Vec<Vec<f64>>> = degrees
        .iter()
        .map(|&d| rule.nodes.iter().map(|&t| legendre_all(d, t)).collect())
        .collect();
    let weights: Vec<f64> = rule.weights.iter().map(|w| w * half).collect();

    let mut component_traces = vec![Vec::new(); m];
    let mut trace = Vec::new();
    for iteration in 1..=max_iter {
        let values: Vec<Vec<f64>> = current
            .iter()
            .map(|f| lambdas.iter().map(|&l| f.eval(l)).collect())
            .collect();
        let mut next = Vec::with_capacity(m);
        match form {
            WeakForm::Example1Scalar => {
                let coef: Vec<f64> = lambdas
                    .iter()
                    .zip(&values[0])
                    .map(|(l, p)| l * p + 2.0)
                    .collect();
                next.push(galerkin_step(
                    &bases[0], &weights, &coef, &lambdas, interval,
                )?);
            }
            WeakForm::Example3Coupled => {
                let c1: Vec<f64> = lambdas
                    .iter()
                    .zip(&values[0])
                    .map(|(l, k)| l * k + 2.0)
                    .collect();
                let ones = vec![1.0; lambdas.len()];
                let k1 = galerkin_step(&bases[0], &weights, &c1, &ones, interval)?;
                let c2: Vec<f64> = values[1].iter().map(|k| k + 1.0).collect();
                let r2: Vec<f64> = lambdas
                    .iter()
                    .zip(&values[1])
                    .map(|(&l, k2)| 2.0 * k1.eval(l) + k2)
                    .collect();
                let k2 = galerkin_step(&bases[1], &weights, &c2, &r2, interval)?;
                next.push(k1);
                next.push(k2);
            }
        }
        let mut worst = 0.0_f64;
        for (k, (new, old)) in next.iter().zip(&current).enumerate() {
            let d = new.l2_distance(old);
            component_traces[k].push(d);
            worst = worst.max(d);
        }
        trace.push(worst);
        current = next;
        if worst <= eps {
            return Ok(GalerkinOutput {
                functions: current,
                trace,
                component_traces,
                iterations: iteration,
            });
        }
        if !worst.is_finite() {
            break;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: trace.len(),
        trace,
    })
}

fn resized(f: &SpectralFunction, degree: usize) -> SpectralFunction {
    let mut c = f.coeffs[0].clone();
    c.resize(degree + 1, 0.0);
    SpectralFunction::scalar(f.interval, c)
}

/// Solves `∫ u · coef · η = ∫ rhs · η` for all `η` of the basis degree.
fn galerkin_step(
    basis: &[Vec<f64>],
    weights: &[f64],
    coef: &[f64],
    rhs: &[f64],
    interval: SpectralInterval,
) -> Result<SpectralFunction> {
    let n = basis[0].len();
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let mut vec = nalgebra::DVector::<f64>::zeros(n);
    for q in 0..weights.len() {
        let phi = &basis[q];
        let wc = weights[q] * coef[q];
        for k in 0..n {
            vec[k] += weights[q] * rhs[q] * phi[k];
            let wk = wc * phi[k];
            for l in 0..n {
                mat[(k, l)] += wk * phi[l];
            }
        }
    }
    let sol = mat
        .lu()
        .solve(&vec)
        .ok_or_else(|| Error::AssemblyFailure("singular Galerkin matrix".into()))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::AssemblyFailure(
            "non-finite Galerkin solution".into(),
        ));
    }
    Ok(SpectralFunction::scalar(
        interval,
        sol.iter().copied().collect(),
    ))
}

/// Least-squares slope of `ln(trace[i])` against `i`.
pub fn fit_decay_rate(trace: &[f64]) -> Result<f64> {
    if trace.len() < 4 {
        return Err(Error::invalid("decay-rate fit needs at least 4 entries"));
    }
    let xs: Vec<f64> = (0..trace.len()).map(|i| i as f64).collect();
    log_linear_slope(&xs, trace)
}

/// Least-squares slope of `ln(y)` against `x`.
pub fn log_linear_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "slope fit needs matching inputs of length at least 2",
        ));
    }
    if ys.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
        return Err(Error::invalid("slope fit needs positive finite values"));
    }
    let logs: Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    linear_slope(xs, &logs)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::l2_relative_error;

    fn unit() -> SpectralInterval {
        SpectralInterval::new(0.0, 1.0).unwrap()
    }

    fn heat() -> ParametricLQR {
        ParametricLQR::scalar(|l| -1.0 / l, |_| 1.0, |_| 1.0, |_| 1.0, unit(), None).unwrap()
    }

    fn exact_heat(l: f64) -> f64 {
        l / (1.0 + libm::sqrt(1.0 + l * l))
    }

    #[test]
    fn heat_symbol_at_one() {
        let sol = are_pointwise(&heat(), 1.0, 1e-12).unwrap();
        assert!((sol.p[(0, 0)] - (libm::sqrt(2.0) - 1.0)).abs() < 1e-12);
        let k = gain_pointwise(&heat(), &sol).unwrap();
        assert_eq!(k[(0, 0)], sol.p[(0, 0)]);
    }

    #[test]
    fn trivial_scalar() {
        let spec = ParametricLQR::scalar(|_| 0.0, |_| 1.0, |_| 1.0, |_| 1.0, unit(), None).unwrap();
        let sol = are_pointwise(&spec, 0.5, 1e-13).unwrap();
        assert!((sol.p[(0, 0)] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unstable_open_loop_is_handled() {
        // a = 1: p = 1 + √2.
        let spec = ParametricLQR::scalar(|_| 1.0, |_| 1.0, |_| 1.0, |_| 1.0, unit(), None).unwrap();
        let sol = are_pointwise(&spec, 0.5, 1e-12).unwrap();
        assert!((sol.p[(0, 0)] - (1.0 + libm::sqrt(2.0))).abs() < 1e-12);
    }

    #[test]
    fn uncontrollable_unstable_mode_fails() {
        let spec = ParametricLQR::scalar(|_| 1.0, |_| 0.0, |_| 1.0, |_| 1.0, unit(), None).unwrap();
        assert!(matches!(
            are_pointwise(&spec, 0.5, 1e-12),
            Err(Error::SolverFailure { .. })
        ));
    }

    #[test]
    fn singular_s_is_invalid_spec() {
        let spec = ParametricLQR::scalar(|_| -1.0, |_| 1.0, |_| 1.0, |_| 0.0, unit(), None);
        let spec = spec.unwrap();
        assert!(matches!(
            are_pointwise(&spec, 0.5, 1e-12),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let r = ParametricLQR::new(
            Box::new(|_| DMatrix::zeros(2, 2)),
            Box::new(|_| DMatrix::zeros(3, 1)),
            Box::new(|_| DMatrix::zeros(1, 2)),
            Box::new(|_| DMatrix::identity(1, 1)),
            unit(),
            None,
        );
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn warm_start_agrees() {
        let spec = heat();
        let a = are_pointwise(&spec, 0.4, 1e-13).unwrap();
        let b = are_pointwise_from(&spec, 0.41, 1e-13, Some(&a.p)).unwrap();
        assert!((b.p[(0, 0)] - exact_heat(0.41)).abs() < 1e-12);
    }

    #[test]
    fn first_galerkin_iterate_is_half_lambda() {
        let zero = SpectralFunction::zero(unit(), 10);
        let out = galerkin_semi_implicit(WeakForm::Example1Scalar, &[10], &[zero], 0.0, 1);
        let Err(Error::ConvergenceFailure { trace, .. }) = out else {
            panic!("expected one step")
        };
        assert_eq!(trace.len(), 1);
        let zero = SpectralFunction::zero(unit(), 10);
        let one = galerkin_semi_implicit(WeakForm::Example1Scalar, &[10], &[zero], 1.0, 1).unwrap();
        let c = &one.functions[0].coeffs[0];
        // λ/2 on [0, 1] is 1/4 + P₁(2λ−1)/4.
        assert!((c[0] - 0.25).abs() < 1e-12);
        assert!((c[1] - 0.25).abs() < 1e-12);
        assert!(c[2..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn galerkin_heat_accuracy_and_rate() {
        let zero = SpectralFunction::zero(unit(), 10);
        let out =
            galerkin_semi_implicit(WeakForm::Example1Scalar, &[10], &[zero], GALERKIN_EPS, 200)
                .unwrap();
        let p = &out.functions[0];
        let e = l2_relative_error(|l| p.eval(l), exact_heat, &unit()).unwrap();
        assert!(e <= 1e-5, "e = {e}");
        let rate = fit_decay_rate(&out.trace).unwrap();
        assert!((-2.3..=-1.3).contains(&rate), "rate {rate}");
    }

    #[test]
    fn galerkin_beam_accuracy() {
        let z = SpectralFunction::zero(unit(), 10);
        let out = galerkin_semi_implicit(
            WeakForm::Example3Coupled,
            &[10, 10],
            &[z.clone(), z],
            GALERKIN_EPS,
            200,
        )
        .unwrap();
        let k1 = |l: f64| 1.0 / (1.0 + libm::sqrt(1.0 + l));
        let e1 = l2_relative_error(|l| out.functions[0].eval(l), k1, &unit()).unwrap();
        let e2 = l2_relative_error(
            |l| out.functions[1].eval(l),
            |l| libm::sqrt(2.0 * k1(l)),
            &unit(),
        )
        .unwrap();
        assert!(e1 <= 1e-8 && e2 <= 1e-8, "e1 {e1} e2 {e2}");
        let rate = fit_decay_rate(&out.trace).unwrap();
        assert!((-2.4..=-1.3).contains(&rate), "rate {rate}");
    }

    #[test]
    fn decay_rate_of_exact_exponential() {
        let t: Vec<f64> = (0..4).map(|i| libm::exp(-(i as f64))).collect();
        assert!((fit_decay_rate(&t).unwrap() + 1.0).abs() < 1e-10);
        assert!(fit_decay_rate(&[1.0, 0.5, 0.0, 0.1]).is_err());
        assert!(fit_decay_rate(&[1.0, 0.5, 0.1]).is_err());
    }
}
