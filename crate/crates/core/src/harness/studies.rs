use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::examples::{
    build_example, example_label, gain_sweep, galerkin_example, heat1d_exact, reference_gain,
    unit_interval, ExampleId, ExampleParams, REFERENCE_TOL,
};
use super::simulate::{evolve_modes, time_grid, time_integrated_quotient};
use super::{StudyResult, Table};
use crate::approx::{
    fit_rational_ls_with_diagnostics, grid_relative_error, legendre_to_monomial, logspace,
    RationalEntry, RationalMatrixFunction, SampleSet,
};
use crate::are::{fit_decay_rate, linear_slope, log_linear_slope};
use crate::contour::{
    quadrature_scalar, realization_error_curve, Contour, ErrorGrid, PreparedRealization,
    QuadratureRule,
};
use crate::discrete::{
    laplacian_continuum_eigenvalues, laplacian_continuum_mode, ClampedBeamModes,
};
use crate::error::{Error, Result};
use crate::spectral::{l2_relative_error, SpectralFunction};

/// Degrees `(N^N, N^D)` of the rational fits for modes `j = 1..=4`.
pub const TABLE1_DEGREES: [(usize, usize); 4] = [(19, 3), (18, 3), (17, 1), (20, 2)];
/// Log-spaced fit nodes in `(10⁻², 1)`.
pub const FIT_NODES: usize = 100;
/// Evaluation grid `λ_n = 10^{−2+n/100}`, `n = 0..=200`.
pub const EVAL_POINTS: usize = 201;
/// Points above this multiple of the plateau count as decaying.
pub const PLATEAU_FACTOR: f64 = 2.0;

pub fn eval_grid() -> Vec<f64> {
    (0..EVAL_POINTS)
        .map(|n| libm::pow(10.0, -2.0 + n as f64 / 100.0))
        .collect()
}

fn check_degrees(degrees: &[usize]) -> Result<()> {
    if degrees.len() < 2 {
        return Err(Error::Config(
            "at least two degrees are needed for a fit".into(),
        ));
    }
    Ok(())
}

/// Galerkin error `e` against the closed forms for each degree, with the fitted exponential rate.
pub fn galerkin_error_study(id: ExampleId, degrees: &[usize]) -> Result<StudyResult> {
    check_degrees(degrees)?;
    let reference = reference_gain(id)?;
    let iv = unit_interval();
    let mut res = StudyResult::new(example_label(id), "e-vs-N");
    res.echo("degrees", join(degrees));
    let comps = reference.components;
    let mut cols = vec!["N"];
    let names = ["e1", "e2"];
    cols.extend(&names[..comps]);
    let mut table = Table::new("error", &cols);
    for &n in degrees {
        let out = galerkin_example(id, n)?;
        let mut row = vec![n as f64];
        for (k, f) in out.functions.iter().enumerate() {
            let e = l2_relative_error(
                |l| f.eval(l),
                |l| reference.component(k, l).unwrap_or(f64::NAN),
                &iv,
            )?;
            row.push(e);
        }
        table.push(row);
    }
    let ns: Vec<f64> = degrees.iter().map(|&n| n as f64).collect();
    for name in &names[..comps] {
        let es = table.column(name).expect("column exists");
        let key = if comps == 1 {
            "slope".into()
        } else {
            format!("slope-{name}")
        };
        res.fits.insert(key, log_linear_slope(&ns, &es)?);
    }
    res.tables.push(table);
    Ok(res)
}

/// Successive-difference trace of the semi-implicit iteration and its decay rate.
pub fn galerkin_rate_study(id: ExampleId, degree: usize) -> Result<StudyResult> {
    let out = galerkin_example(id, degree)?;
    let reference = reference_gain(id)?;
    let iv = unit_interval();
    let mut res = StudyResult::new(example_label(id), "rate");
    res.echo("degree", degree);
    let comps = out.functions.len();
    let mut cols = vec!["iteration", "difference"];
    let names = ["difference-1", "difference-2"];
    if comps > 1 {
        cols.extend(&names[..comps]);
    }
    let mut trace = Table::new("trace", &cols);
    for (i, d) in out.trace.iter().enumerate() {
        let mut row = vec![(i + 1) as f64, *d];
        if comps > 1 {
            row.extend(out.component_traces.iter().map(|t| t[i]));
        }
        trace.push(row);
    }
    res.fits.insert("rate".into(), fit_decay_rate(&out.trace)?);
    if comps > 1 {
        for (k, t) in out.component_traces.iter().enumerate() {
            res.fits
                .insert(format!("rate-{}", k + 1), fit_decay_rate(t)?);
        }
    }
    res.fits.insert("iterations".into(), out.iterations as f64);
    for (k, f) in out.functions.iter().enumerate() {
        let e = l2_relative_error(
            |l| f.eval(l),
            |l| reference.component(k, l).unwrap_or(f64::NAN),
            &iv,
        )?;
        let key = if comps == 1 {
            "e".into()
        } else {
            format!("e{}", k + 1)
        };
        res.fits.insert(key, e);
    }
    let mut coeffs = Table::new("coefficients", &["component", "k", "legendre"]);
    for (c, f) in out.functions.iter().enumerate() {
        for (k, v) in f.coeffs[0].iter().enumerate() {
            coeffs.push(vec![c as f64, k as f64, *v]);
        }
    }
    res.tables.push(trace);
    res.tables.push(coeffs);
    Ok(res)
}

/// Monomial coefficients `(d₀, d₁)` of the degree-one Galerkin solution of the heat example.
pub fn linear_coefficients() -> Result<(f64, f64)> {
    let out = galerkin_example(ExampleId::Heat1D, 1)?;
    let m = legendre_to_monomial(&out.functions[0])?;
    let num = &m.entries[0].num;
    Ok((num[0], num.get(1).copied().unwrap_or(0.0)))
}

/// Polynomial gains of the heat or beam example as a `1 × c` monomial function.
pub fn galerkin_gain(id: ExampleId, degree: usize) -> Result<RationalMatrixFunction> {
    let out = galerkin_example(id, degree)?;
    gain_from_functions(&out.functions)
}

fn gain_from_functions(functions: &[SpectralFunction]) -> Result<RationalMatrixFunction> {
    let entries = functions
        .iter()
        .map(|f| Ok(legendre_to_monomial(f)?.entries.swap_remove(0)))
        .collect::<Result<Vec<RationalEntry>>>()?;
    RationalMatrixFunction::new(1, entries.len(), entries)
}

/// Slope of `ln E(M)` over the points with `E > PLATEAU_FACTOR · plateau`.
pub fn pre_plateau_slope(ms: &[f64], es: &[f64], plateau: f64) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = ms
        .iter()
        .zip(es)
        .filter(|(_, e)| **e > PLATEAU_FACTOR * plateau)
        .map(|(m, e)| (*m, *e))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::NumericFailure(
            "fewer than two points above the plateau".into(),
        ));
    }
    log_linear_slope(&xs, &ys)
}

/// `E(M)` of the heat example for each radius, with the polynomial error `e` as plateau.
pub fn contour_error_study(
    degree: usize,
    radii: &[f64],
    m_list: &[usize],
    mesh: usize,
) -> Result<StudyResult> {
    if radii.is_empty() || m_list.len() < 2 {
        return Err(Error::Config(
            "need at least one radius and two node counts".into(),
        ));
    }
    let gain = galerkin_gain(ExampleId::Heat1D, degree)?;
    let entry = gain.entries[0].clone();
    let iv = unit_interval();
    let plateau = l2_relative_error(|l| entry.eval(l), heat1d_exact, &iv)?;
    let problem = build_example(ExampleId::Heat1D, ExampleParams { mesh })?;
    let modal = problem.operator.eigendecompose()?;
    let mut res = StudyResult::new("heat1d", "E-vs-M");
    res.echo("degree", degree);
    res.echo("R", join(radii));
    res.echo("M", join(m_list));
    res.echo("mesh", mesh);
    res.fits.insert("e".into(), plateau);
    for &r in radii {
        let contour = Contour::circle(r)?;
        let curve = realization_error_curve(
            &entry,
            heat1d_exact,
            &contour,
            &modal,
            &ErrorGrid::Lgl(iv),
            m_list,
        )?;
        let mut t = Table::new(format!("R={r}"), &["M", "E", "E_op", "R"]);
        for p in &curve {
            t.push(vec![p.m as f64, p.function_error, p.operator_error, r]);
        }
        let ms = t.column("M").expect("column");
        let es = t.column("E").expect("column");
        res.fits.insert(
            format!("slope-R={r}"),
            pre_plateau_slope(&ms, &es, plateau)?,
        );
        res.fits
            .insert(format!("final-R={r}"), *es.last().expect("non-empty"));
        res.fits
            .insert(format!("floor-R={r}"), roundoff_floor(&entry, &contour)?);
        res.tables.push(t);
    }
    Ok(res)
}

/// `ε · max |r(ξ)|` over the contour: the level below which the quadrature
/// sum cannot resolve `r(λ)` because its terms cancel.
pub fn roundoff_floor(r: &RationalEntry, contour: &Contour) -> Result<f64> {
    let n = 4096;
    let mut top = 0.0_f64;
    for k in 0..n {
        let t = 2.0 * core::f64::consts::PI * k as f64 / n as f64;
        top = top.max(r.eval_complex(contour.point(t))?.norm());
    }
    Ok(f64::EPSILON * top)
}

/// Reference gain rows of the boundary-controlled heat example at `lambdas`.
pub fn heat2d_gain_samples(modes: usize, lambdas: Vec<f64>) -> Result<SampleSet> {
    let problem = build_example(
        ExampleId::Heat2DBoundary { j: modes },
        ExampleParams::default(),
    )?;
    let values = gain_sweep(&problem.spec, &lambdas, REFERENCE_TOL)?;
    SampleSet::new(lambdas, values)
}

/// Rational fits of each gain component with the given degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFits {
    pub entries: Vec<RationalEntry>,
    /// Relative ℓ² error on the evaluation grid, per mode.
    pub errors: Vec<f64>,
    /// Reference gain on the evaluation grid, `reference[n][j]`.
    pub reference: Vec<Vec<f64>>,
}

impl ModeFits {
    pub fn gain(&self) -> Result<RationalMatrixFunction> {
        RationalMatrixFunction::new(1, self.entries.len(), self.entries.clone())
    }
}

/// Fits every component of the boundary-controlled heat gain and measures the grid errors.
pub fn fit_heat2d(degrees: &[(usize, usize)]) -> Result<(ModeFits, Vec<f64>)> {
    let modes = degrees.len();
    if modes == 0 {
        return Err(Error::Config("at least one degree pair is needed".into()));
    }
    let iv = unit_interval();
    let fit = heat2d_gain_samples(modes, logspace(-2.0, 0.0, FIT_NODES))?;
    let grid = eval_grid();
    let eval = heat2d_gain_samples(modes, grid.clone())?;
    let reference: Vec<Vec<f64>> = eval
        .values
        .iter()
        .map(|v| v.iter().copied().collect())
        .collect();
    let mut entries = Vec::with_capacity(modes);
    let mut errors = Vec::with_capacity(modes);
    let mut sigma = Vec::with_capacity(modes);
    for (j, &deg) in degrees.iter().enumerate() {
        let column = SampleSet::new(
            fit.lambdas.clone(),
            fit.values
                .iter()
                .map(|v| DMatrix::from_element(1, 1, v[(0, j)]))
                .collect(),
        )?;
        let (r, diag) = fit_rational_ls_with_diagnostics(&column, deg, &iv)?;
        let entry = r.entries[0].clone();
        let err = grid_relative_error(
            |x| {
                let n = grid.iter().position(|g| *g == x).expect("grid point");
                reference[n][j]
            },
            &entry,
            &grid,
        )?;
        entries.push(entry);
        errors.push(err);
        sigma.push(diag[0].sigma_ratio);
    }
    Ok((
        ModeFits {
            entries,
            errors,
            reference,
        },
        sigma,
    ))
}

/// Fit errors `e_j`, singular-value ratios and pole distances for each mode.
pub fn table1_study(degrees: &[(usize, usize)]) -> Result<(StudyResult, ModeFits)> {
    let (fits, sigma) = fit_heat2d(degrees)?;
    let mut res = StudyResult::new(format!("heat2d-j{}", degrees.len()), "fit");
    res.echo("degrees", join_pairs(degrees));
    res.echo("fit_nodes", FIT_NODES);
    res.echo("eval_points", EVAL_POINTS);
    let mut t = Table::new(
        "fit",
        &["j", "NN", "ND", "e", "sigma_ratio", "pole_distance"],
    );
    for (j, ((entry, e), s)) in fits
        .entries
        .iter()
        .zip(&fits.errors)
        .zip(&sigma)
        .enumerate()
    {
        let dist = entry
            .poles()?
            .iter()
            .map(|p| distance_to_unit_interval(*p))
            .fold(f64::INFINITY, f64::min);
        let (nn, nd) = degrees[j];
        t.push(vec![(j + 1) as f64, nn as f64, nd as f64, *e, *s, dist]);
        res.fits.insert(format!("e{}", j + 1), *e);
    }
    res.tables.push(t);
    Ok((res, fits))
}

fn distance_to_unit_interval(p: Complex64) -> f64 {
    let x = p.re.clamp(0.0, 1.0);
    (p - Complex64::new(x, 0.0)).norm()
}

/// `E_j(M)`: relative ℓ² error of the quadrature of each fitted component on the evaluation grid.
pub fn ellipse_curve_study(
    fits: &ModeFits,
    contour: &Contour,
    m_list: &[usize],
) -> Result<StudyResult> {
    let grid = eval_grid();
    let mut res = StudyResult::new(format!("heat2d-j{}", fits.entries.len()), "E-vs-M");
    res.echo("contour", format!("{contour:?}"));
    res.echo("M", join(m_list));
    let mut cols = vec!["M"];
    let names: Vec<_> = (1..=fits.entries.len()).map(|j| format!("E{j}")).collect();
    cols.extend(names.iter().map(|s| s.as_str()));
    let shape = match *contour {
        Contour::Circle { r } => vec![r],
        Contour::Ellipse { r1, r2 } => vec![r1, r2],
    };
    cols.extend(if shape.len() == 1 {
        &["R"][..]
    } else {
        &["R1", "R2"][..]
    });
    let mut t = Table::new("curves", &cols);
    for &m in m_list {
        let rule = QuadratureRule::trapezoid(m)?;
        let mut row = vec![m as f64];
        for (j, entry) in fits.entries.iter().enumerate() {
            let mut num = 0.0;
            let mut den = 0.0;
            for (n, &x) in grid.iter().enumerate() {
                let q = quadrature_scalar(|xi| entry.eval_complex(xi), contour, &rule, x)?;
                let k = fits.reference[n][j];
                num += (q - k) * (q - k);
                den += k * k;
            }
            row.push(libm::sqrt(num / den));
        }
        row.extend(&shape);
        t.push(row);
    }
    for name in &names {
        let es = t.column(name).expect("column");
        let ms = t.column("M").expect("column");
        res.fits
            .insert(format!("slope-{name}"), log_linear_slope(&ms, &es)?);
        res.fits.insert(
            format!("drop-{name}"),
            libm::log10(es[0] / es[es.len() - 1]),
        );
    }
    res.tables.push(t);
    Ok(res)
}

/// Which modes the reference control is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceModes {
    /// Eigenpairs of the continuous operator, sampled on the grid.
    Continuum,
    /// Eigenpairs of the discrete operator; the quotient then measures the realization alone.
    Discrete,
}

/// Settings of [`spatial_error_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialConfig {
    /// Galerkin degree for the heat and beam gains.
    pub degree: usize,
    /// Rational degrees per mode for the boundary-controlled heat gain.
    pub mode_degrees: Vec<(usize, usize)>,
    pub contour: Contour,
    pub m: usize,
    /// Cell counts, strictly increasing.
    pub meshes: Vec<usize>,
    pub t_end: f64,
    pub steps: usize,
    pub reference: ReferenceModes,
}

impl SpatialConfig {
    pub fn default_for(id: ExampleId) -> Result<Self> {
        Ok(match id {
            ExampleId::Heat1D => Self {
                degree: 10,
                mode_degrees: Vec::new(),
                contour: Contour::circle(5.0)?,
                m: 11,
                meshes: vec![16, 32, 64, 128],
                t_end: 1.0,
                steps: 200,
                reference: ReferenceModes::Continuum,
            },
            ExampleId::Beam1D => Self {
                degree: 10,
                mode_degrees: Vec::new(),
                contour: Contour::circle(5.0)?,
                m: 11,
                meshes: vec![100],
                t_end: 15.0,
                steps: 1500,
                reference: ReferenceModes::Continuum,
            },
            ExampleId::Heat2DBoundary { j } => {
                if j > TABLE1_DEGREES.len() {
                    return Err(Error::Config(format!(
                        "no default fit degrees for {j} modes"
                    )));
                }
                Self {
                    degree: 0,
                    mode_degrees: TABLE1_DEGREES[..j].to_vec(),
                    contour: Contour::ellipse(1.02, 0.07)?,
                    m: 100,
                    meshes: vec![16, 32, 64, 128],
                    t_end: 1.0,
                    steps: 200,
                    reference: ReferenceModes::Continuum,
                }
            }
            ExampleId::Heat1DUnboundedB => {
                return Err(Error::Config(
                    "no spatial study for the unbounded example".into(),
                ))
            }
        })
    }
}

// Closed-loop modal generator for one eigenvalue, given the realized gain
// components `r` at that eigenvalue.
fn generator(id: ExampleId, lambda: f64, r: &[f64]) -> DMatrix<f64> {
    match id {
        ExampleId::Heat1D | ExampleId::Heat1DUnboundedB => {
            DMatrix::from_element(1, 1, -(1.0 / lambda + r[0]))
        }
        ExampleId::Beam1D => {
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -(1.0 / lambda + r[0]), -r[1]])
        }
        ExampleId::Heat2DBoundary { j } => {
            let b = super::examples::boundary_weights(j);
            DMatrix::from_fn(j, j, |p, q| {
                let diag = if p == q {
                    let k = (p + 1) as f64;
                    -(k * k * core::f64::consts::PI * core::f64::consts::PI + 1.0 / lambda)
                } else {
                    0.0
                };
                diag - b[p] * r[q]
            })
        }
    }
}

/// Eigenpairs with initial modal states, sampled on a grid.
struct ModeSet {
    eigenvalues: Vec<f64>,
    // `initial[i]` has one entry per state component.
    initial: Vec<DVector<f64>>,
    // `values[i]` is mode `i` on the grid.
    values: Vec<Vec<f64>>,
}

fn realized_symbols(
    gain: &RationalMatrixFunction,
    contour: &Contour,
    rule: &QuadratureRule,
    lambda: f64,
) -> Result<Vec<f64>> {
    gain.entries
        .iter()
        .map(|e| quadrature_scalar(|xi| e.eval_complex(xi), contour, rule, lambda))
        .collect()
}

/// `u_i(t) = −Σ_c r_c(λ_i) x_{i,c}(t)` summed against the sampled modes.
fn modal_controls(
    id: ExampleId,
    modes: &ModeSet,
    gain: &RationalMatrixFunction,
    contour: &Contour,
    rule: &QuadratureRule,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    let symbols = modes
        .eigenvalues
        .iter()
        .map(|&l| realized_symbols(gain, contour, rule, l))
        .collect::<Result<Vec<_>>>()?;
    let gens: Vec<DMatrix<f64>> = modes
        .eigenvalues
        .iter()
        .zip(&symbols)
        .map(|(&l, r)| generator(id, l, r))
        .collect();
    let states = evolve_modes(&gens, &modes.initial, dt, steps)?;
    let n = modes.values.first().map_or(0, Vec::len);
    Ok(states
        .iter()
        .map(|st| {
            let mut u = vec![0.0; n];
            for ((x, r), phi) in st.iter().zip(&symbols).zip(&modes.values) {
                let amp: f64 = -x.iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
                for (o, p) in u.iter_mut().zip(phi) {
                    *o += amp * p;
                }
            }
            u
        })
        .collect())
}

fn continuum_modes(id: ExampleId, length: f64, xs: &[f64]) -> ModeSet {
    let c = libm::sqrt(length / 2.0);
    match id {
        ExampleId::Heat1D | ExampleId::Heat1DUnboundedB => {
            let eig = laplacian_continuum_eigenvalues(3, length);
            let w = [1.0, 0.5, 0.25];
            ModeSet {
                eigenvalues: eig,
                initial: w.iter().map(|a| DVector::from_element(1, c * a)).collect(),
                values: (1..=3)
                    .map(|i| {
                        xs.iter()
                            .map(|&x| laplacian_continuum_mode(i, length, x))
                            .collect()
                    })
                    .collect(),
            }
        }
        ExampleId::Beam1D => {
            let beam = ClampedBeamModes::new(1, length);
            ModeSet {
                eigenvalues: beam.eigenvalues(),
                initial: vec![DVector::from_column_slice(&[1.0, 0.0])],
                values: vec![xs.iter().map(|&x| beam.mode(0, x)).collect()],
            }
        }
        ExampleId::Heat2DBoundary { j } => {
            let eig = laplacian_continuum_eigenvalues(2, length);
            let w = [1.0, 0.5];
            ModeSet {
                eigenvalues: eig,
                initial: w
                    .iter()
                    .map(|a| DVector::from_fn(j, |q, _| c * a / (q + 1) as f64))
                    .collect(),
                values: (1..=2)
                    .map(|i| {
                        xs.iter()
                            .map(|&x| laplacian_continuum_mode(i, length, x))
                            .collect()
                    })
                    .collect(),
            }
        }
    }
}

/// Initial state on the grid, one vector per state component.
fn initial_grid_state(id: ExampleId, length: f64, xs: &[f64]) -> Vec<Vec<f64>> {
    match id {
        ExampleId::Heat1D | ExampleId::Heat1DUnboundedB => vec![xs
            .iter()
            .map(|&x| libm::sin(x) + 0.5 * libm::sin(2.0 * x) + 0.25 * libm::sin(3.0 * x))
            .collect()],
        ExampleId::Beam1D => {
            let beam = ClampedBeamModes::new(1, length);
            vec![
                xs.iter().map(|&x| beam.mode(0, x)).collect(),
                vec![0.0; xs.len()],
            ]
        }
        ExampleId::Heat2DBoundary { j } => (1..=j)
            .map(|q| {
                xs.iter()
                    .map(|&y| (libm::sin(y) + 0.5 * libm::sin(2.0 * y)) / q as f64)
                    .collect()
            })
            .collect(),
    }
}

/// Time-integrated relative error between the realized control on the grid
/// and the modal reference, for each mesh, with the fitted order in `h`.
///
/// The discrete state evolves exactly in the eigenbasis of `Λ_h`; the control
/// at every time step is produced by the contour realization itself.
pub fn spatial_error_study(id: ExampleId, cfg: &SpatialConfig) -> Result<StudyResult> {
    if cfg.meshes.is_empty() || cfg.meshes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "meshes must be non-empty and strictly increasing".into(),
        ));
    }
    if cfg.steps < 200 {
        return Err(Error::Config(
            "time integration needs at least 200 steps".into(),
        ));
    }
    let gain = match id {
        ExampleId::Heat1D | ExampleId::Beam1D => galerkin_gain(id, cfg.degree)?,
        ExampleId::Heat2DBoundary { j } => {
            if cfg.mode_degrees.len() != j {
                return Err(Error::Config(format!("{j} degree pairs expected")));
            }
            fit_heat2d(&cfg.mode_degrees)?.0.gain()?
        }
        ExampleId::Heat1DUnboundedB => {
            return Err(Error::Config(
                "no spatial study for the unbounded example".into(),
            ))
        }
    };
    let rule = QuadratureRule::trapezoid(cfg.m)?;
    let times = time_grid(cfg.t_end, cfg.steps)?;
    let dt = cfg.t_end / cfg.steps as f64;
    let mut res = StudyResult::new(example_label(id), "spatial");
    res.echo("degree", cfg.degree);
    res.echo("mode_degrees", join_pairs(&cfg.mode_degrees));
    res.echo("contour", format!("{:?}", cfg.contour));
    res.echo("M", cfg.m);
    res.echo("meshes", join(&cfg.meshes));
    res.echo("T", cfg.t_end);
    res.echo("steps", cfg.steps);
    res.echo("reference", format!("{:?}", cfg.reference));
    let mut table = Table::new("spatial", &["mesh", "h", "quotient", "max_residual"]);
    for &mesh in &cfg.meshes {
        let problem = build_example(id, ExampleParams { mesh })?;
        let op = &problem.operator;
        let xs = op.grid();
        let modal = op.eigendecompose()?;
        let z0 = initial_grid_state(id, problem.length, &xs);
        let discrete = ModeSet {
            eigenvalues: modal.eigenvalues.clone(),
            initial: {
                let coords: Vec<Vec<f64>> = z0.iter().map(|z| modal.coordinates(z)).collect();
                (0..modal.dim())
                    .map(|k| DVector::from_fn(z0.len(), |c, _| coords[c][k]))
                    .collect()
            },
            values: (0..modal.dim())
                .map(|k| modal.vectors.column(k).iter().copied().collect())
                .collect(),
        };
        let reference = match cfg.reference {
            ReferenceModes::Continuum => modal_controls(
                id,
                &continuum_modes(id, problem.length, &xs),
                &gain,
                &cfg.contour,
                &rule,
                dt,
                cfg.steps,
            )?,
            ReferenceModes::Discrete => {
                modal_controls(id, &discrete, &gain, &cfg.contour, &rule, dt, cfg.steps)?
            }
        };
        // Discrete closed loop: exact modal stepping, control from the realization.
        let symbols = discrete
            .eigenvalues
            .iter()
            .map(|&l| realized_symbols(&gain, &cfg.contour, &rule, l))
            .collect::<Result<Vec<_>>>()?;
        let gens: Vec<DMatrix<f64>> = discrete
            .eigenvalues
            .iter()
            .zip(&symbols)
            .map(|(&l, r)| generator(id, l, r))
            .collect();
        let states = evolve_modes(&gens, &discrete.initial, dt, cfg.steps)?;
        let prepared = PreparedRealization::new(&gain, &cfg.contour, &rule, op, &problem.interval)?;
        let mut realized = Vec::with_capacity(states.len());
        let mut worst = 0.0_f64;
        for st in &states {
            let z: Vec<Vec<f64>> = (0..z0.len())
                .map(|c| {
                    let coords: Vec<f64> = st.iter().map(|x| x[c]).collect();
                    modal.synthesize(&coords)
                })
                .collect();
            let out = prepared.apply(&z)?;
            worst = worst.max(out.max_residual());
            realized.push(out.outputs[0].iter().map(|v| -v).collect::<Vec<f64>>());
        }
        let q = time_integrated_quotient(&times, &realized, &reference)?;
        table.push(vec![mesh as f64, op.h(), q, worst]);
    }
    res.fits = spatial_fits(&table)?;
    res.tables.push(table);
    Ok(res)
}

/// `order` (slope of `ln q` against `ln h`, from three meshes on) and the
/// `quotient` of the finest mesh, from a table with `h` and `quotient` columns.
pub fn spatial_fits(table: &Table) -> Result<BTreeMap<String, f64>> {
    let mut fits = BTreeMap::new();
    let (Some(hs), Some(qs)) = (table.column("h"), table.column("quotient")) else {
        return Err(Error::invalid("spatial table needs h and quotient columns"));
    };
    if hs.len() >= 3 && qs.iter().all(|q| *q > 0.0) {
        let lh: Vec<f64> = hs.iter().map(|h| libm::log(*h)).collect();
        let lq: Vec<f64> = qs.iter().map(|q| libm::log(*q)).collect();
        fits.insert("order".into(), linear_slope(&lh, &lq)?);
    }
    if let Some(q) = qs.last() {
        fits.insert("quotient".into(), *q);
    }
    Ok(fits)
}

fn join<T: core::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn join_pairs(xs: &[(usize, usize)]) -> String {
    xs.iter()
        .map(|(a, b)| format!("{a}/{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::realize_scalar;

    #[test]
    fn plateau_slope_ignores_flat_tail() {
        let ms = [5.0, 6.0, 7.0, 8.0, 9.0];
        let es = [1e-2, 1e-3, 1e-4, 1e-6, 1e-6];
        let s = pre_plateau_slope(&ms, &es, 1e-6).unwrap();
        assert!((s - libm::log(0.1)).abs() < 1e-12);
        assert!(pre_plateau_slope(&ms, &[1e-6; 5], 1e-6).is_err());
    }

    #[test]
    fn discrete_reference_isolates_the_realization() {
        let mut cfg = SpatialConfig::default_for(ExampleId::Heat1D).unwrap();
        cfg.meshes = vec![16, 32, 64];
        cfg.reference = ReferenceModes::Discrete;
        let res = spatial_error_study(ExampleId::Heat1D, &cfg).unwrap();
        for q in res.table("spatial").unwrap().column("quotient").unwrap() {
            assert!(q <= 1e-9, "{q}");
        }
    }

    #[test]
    fn realized_gain_on_eigenvectors() {
        let gain = galerkin_gain(ExampleId::Heat1D, 10).unwrap();
        let entry = &gain.entries[0];
        let problem = build_example(ExampleId::Heat1D, ExampleParams { mesh: 32 }).unwrap();
        let modal = problem.operator.eigendecompose().unwrap();
        let contour = Contour::circle(5.0).unwrap();
        let rule = QuadratureRule::trapezoid(11).unwrap();
        for k in [0, 7, 30] {
            let phi: Vec<f64> = modal.vectors.column(k).iter().copied().collect();
            let out = realize_scalar(
                entry,
                &contour,
                &rule,
                &problem.operator,
                &problem.interval,
                &phi,
            )
            .unwrap();
            let pnm = quadrature_scalar(
                |xi| entry.eval_complex(xi),
                &contour,
                &rule,
                modal.eigenvalues[k],
            )
            .unwrap();
            let err = out
                .iter()
                .zip(&phi)
                .map(|(a, b)| (a - pnm * b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-9, "{err}");
        }
    }

    #[test]
    fn spatial_config_validation() {
        let mut cfg = SpatialConfig::default_for(ExampleId::Heat1D).unwrap();
        cfg.meshes = vec![32, 16];
        assert!(matches!(
            spatial_error_study(ExampleId::Heat1D, &cfg),
            Err(Error::Config(_))
        ));
        assert!(SpatialConfig::default_for(ExampleId::Heat1DUnboundedB).is_err());
    }
}
