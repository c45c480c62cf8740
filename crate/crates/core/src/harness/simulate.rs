use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::band::{BandLu, BandMatrix};
use crate::contour::PreparedRealization;
use crate::discrete::BandedOperator;
use crate::error::{Error, Result};

/// Uniform time grid `t_n = n T / steps`, `n = 0..=steps`.
pub fn time_grid(t_end: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) || steps == 0 {
        return Err(Error::Config(format!(
            "need T > 0 and at least one step, got T={t_end}, steps={steps}"
        )));
    }
    let dt = t_end / steps as f64;
    Ok((0..=steps).map(|n| n as f64 * dt).collect())
}

/// Exact stepping of `ẋ_k = F_k x_k` for independent modes.
///
/// Returns `states[n][k]` at `t_n = n dt`, `n = 0..=steps`.
pub fn evolve_modes(
    generators: &[DMatrix<f64>],
    initial: &[DVector<f64>],
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<DVector<f64>>>> {
    if generators.len() != initial.len() {
        return Err(Error::invalid(
            "one generator per initial modal state expected",
        ));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let props: Vec<DMatrix<f64>> = generators.iter().map(|f| expm(&(f * dt))).collect();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial.to_vec());
    for _ in 0..steps {
        let prev = states.last().expect("non-empty");
        let next: Vec<DVector<f64>> = props.iter().zip(prev).map(|(e, x)| e * x).collect();
        if next.iter().any(|x| x.iter().any(|v| !v.is_finite())) {
            return Err(Error::NumericFailure(
                "modal evolution produced non-finite values".into(),
            ));
        }
        states.push(next);
    }
    Ok(states)
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.abs().row_sum().max();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    // ‖a‖ ≤ 1/2, so 18 terms reach double precision.
    for k in 1..=18 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `u(t, x) = −Σ_i w_i e^{−(1/λ_i + p(λ_i)) t} p(λ_i) φ_i(x)` at every point of `xs`.
pub fn modal_reference_control(
    symbol: impl Fn(f64) -> f64,
    coeffs: &[f64],
    eigenvalues: &[f64],
    mode: impl Fn(usize, f64) -> f64,
    t: f64,
    xs: &[f64],
) -> Result<Vec<f64>> {
    if coeffs.len() != eigenvalues.len() {
        return Err(Error::invalid(
            "one modal coefficient per eigenvalue expected",
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid("time must be nonnegative"));
    }
    let mut out = vec![0.0; xs.len()];
    for (i, (&w, &lam)) in coeffs.iter().zip(eigenvalues).enumerate() {
        if w == 0.0 {
            continue;
        }
        let p = symbol(lam);
        let amp = -w * libm::exp(-(1.0 / lam + p) * t) * p;
        if !amp.is_finite() {
            return Err(Error::Evaluation {
                location: lam,
                what: "reference control".into(),
            });
        }
        for (o, &x) in out.iter_mut().zip(xs) {
            *o += amp * mode(i, x);
        }
    }
    Ok(out)
}

/// Factor of `I + dt A`.
pub fn implicit_euler_factor(a: &BandMatrix, dt: f64) -> Result<BandLu> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let n = a.dim();
    let mut m = BandMatrix::zeros(n, a.lower_bandwidth(), a.upper_bandwidth());
    for (i, j, v) in a.triplets() {
        m.set(i, j, dt * v);
    }
    for i in 0..n {
        let d = m.get(i, i);
        m.set(i, i, d + 1.0);
    }
    m.lu()
}

/// `‖z‖²` along the scheme `(I + Δt A) z^{n+1} = z^n − Δt k(Λ_h) z^n`.
///
/// The diffusion is implicit and the realized feedback explicit, so the energy
/// is non-increasing whenever `0 ≤ k ≤ 2/Δt` on the spectrum.
pub fn closed_loop_energy(
    op: &BandedOperator,
    feedback: &PreparedRealization<'_>,
    z0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    if z0.len() != op.dim() {
        return Err(Error::invalid(
            "initial state length does not match the operator",
        ));
    }
    let lu = implicit_euler_factor(op.matrix(), dt)?;
    let mut z = z0.to_vec();
    let mut energy = Vec::with_capacity(steps + 1);
    energy.push(z.iter().map(|v| v * v).sum());
    for _ in 0..steps {
        let ku = feedback.apply(&[z.clone()])?;
        let mut rhs: Vec<f64> = z
            .iter()
            .zip(&ku.outputs[0])
            .map(|(zi, ki)| zi - dt * ki)
            .collect();
        lu.solve_in_place(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure(
                "closed loop produced non-finite values".into(),
            ));
        }
        z = rhs;
        energy.push(z.iter().map(|v| v * v).sum());
    }
    Ok(energy)
}

/// Recovers `v` from `u = ∂_t v − ∂_yy v` with `v = 0` at both ends.
///
/// `u[n]` is the source at `t_n = n dt`; implicit Euler uses `u[n+1]` for the
/// step to `t_{n+1}`. Returns `v[n]` for every `n`.
pub fn boundary_control_recover(
    op: &BandedOperator,
    u: &[Vec<f64>],
    v0: &[f64],
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let n = op.dim();
    if v0.len() != n || u.iter().any(|row| row.len() != n) {
        return Err(Error::invalid(
            "control samples must match the operator grid",
        ));
    }
    let lu = implicit_euler_factor(op.matrix(), dt)?;
    let mut out = Vec::with_capacity(u.len().max(1));
    out.push(v0.to_vec());
    for src in u.iter().skip(1) {
        let prev = out.last().expect("non-empty");
        let mut rhs: Vec<f64> = prev.iter().zip(src).map(|(v, s)| v + dt * s).collect();
        lu.solve_in_place(&mut rhs);
        out.push(rhs);
    }
    Ok(out)
}

/// `∫₀ᵀ ‖a(t) − b(t)‖ dt / ∫₀ᵀ ‖b(t)‖ dt` by the composite trapezoid rule.
pub fn time_integrated_quotient(
    times: &[f64],
    approx: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<f64> {
    if times.len() != approx.len() || times.len() != reference.len() || times.len() < 2 {
        return Err(Error::invalid(
            "quotient needs matching time series of length at least 2",
        ));
    }
    let norm = |v: &mut dyn Iterator<Item = f64>| libm::sqrt(v.map(|x| x * x).sum::<f64>());
    let diff: Vec<f64> = approx
        .iter()
        .zip(reference)
        .map(|(a, b)| norm(&mut a.iter().zip(b).map(|(x, y)| x - y)))
        .collect();
    let refn: Vec<f64> = reference
        .iter()
        .map(|b| norm(&mut b.iter().copied()))
        .collect();
    let num = trapezoid(times, &diff);
    let den = trapezoid(times, &refn);
    if den == 0.0 {
        return Err(Error::DivisionDegenerate);
    }
    Ok(num / den)
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::laplacian_1d_dirichlet;
    use core::f64::consts::PI;

    #[test]
    fn zero_source_stays_zero() {
        let op = laplacian_1d_dirichlet(32, PI).unwrap();
        let u = vec![vec![0.0; op.dim()]; 11];
        let v = boundary_control_recover(&op, &u, &vec![0.0; op.dim()], 0.1).unwrap();
        assert!(v.iter().flatten().all(|x| *x == 0.0));
        assert!(matches!(
            boundary_control_recover(&op, &u, &vec![0.0; op.dim()], 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn manufactured_growth() {
        // v = eᵗ sin y requires u = 2 eᵗ sin y.
        let (cells, steps, t_end) = (64, 400, 1.0);
        let op = laplacian_1d_dirichlet(cells, PI).unwrap();
        let ys = op.grid();
        let ts = time_grid(t_end, steps).unwrap();
        let u: Vec<Vec<f64>> = ts
            .iter()
            .map(|&t| {
                ys.iter()
                    .map(|&y| 2.0 * libm::exp(t) * libm::sin(y))
                    .collect()
            })
            .collect();
        let v0: Vec<f64> = ys.iter().map(|&y| libm::sin(y)).collect();
        let v = boundary_control_recover(&op, &u, &v0, t_end / steps as f64).unwrap();
        let err = v[steps]
            .iter()
            .zip(&ys)
            .map(|(a, &y)| (a - libm::exp(t_end) * libm::sin(y)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn step_response_reaches_steady_state() {
        let op = laplacian_1d_dirichlet(64, PI).unwrap();
        let ys = op.grid();
        let ts = time_grid(10.0, 1000).unwrap();
        let u: Vec<Vec<f64>> = ts
            .iter()
            .map(|&t| {
                ys.iter()
                    .map(|&y| if t > 0.0 { libm::sin(y) } else { 0.0 })
                    .collect()
            })
            .collect();
        let v = boundary_control_recover(&op, &u, &vec![0.0; op.dim()], 0.01).unwrap();
        let err = v[1000]
            .iter()
            .zip(&ys)
            .map(|(a, &y)| (a - libm::sin(y)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn one_term_reference() {
        let p = |l: f64| 0.3 * l;
        let xs = [0.3, 1.2];
        let mode = |_: usize, x: f64| libm::sin(x);
        let u = modal_reference_control(p, &[2.0], &[1.0], mode, 0.5, &xs).unwrap();
        for (v, &x) in u.iter().zip(&xs) {
            let expect = -2.0 * libm::exp(-1.3 * 0.5) * 0.3 * libm::sin(x);
            assert!((v - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn modal_stepping_matches_scalar_exponential() {
        let f = vec![DMatrix::from_element(1, 1, -2.0)];
        let x0 = vec![DVector::from_element(1, 1.0)];
        let s = evolve_modes(&f, &x0, 0.01, 100).unwrap();
        assert!((s[100][0][0] - libm::exp(-2.0)).abs() < 1e-13);
    }
}
