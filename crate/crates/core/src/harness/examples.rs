use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::are::{
    are_pointwise, are_pointwise_from, gain_pointwise, galerkin_semi_implicit, GalerkinOutput,
    Isomorphisms, ParametricLQR, WeakForm, GALERKIN_EPS, GALERKIN_MAX_ITER,
};
use crate::discrete::{biharmonic_1d_clamped, laplacian_1d_dirichlet, BandedOperator};
use crate::error::{Error, Result};
use crate::spectral::{SpectralFunction, SpectralInterval};

/// Beam length giving a first clamped eigenvalue close to one.
pub const BEAM_LENGTH: f64 = 4.73;
/// Largest number of boundary modes for the two-dimensional heat example.
pub const MAX_BOUNDARY_MODES: usize = 8;
/// Tolerance of pointwise Riccati solves used as references.
pub const REFERENCE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExampleId {
    /// Heat equation on `(0, π)` with distributed control.
    Heat1D,
    /// Heat equation with an unbounded control operator.
    Heat1DUnboundedB,
    /// Clamped Euler–Bernoulli beam.
    Beam1D,
    /// Heat equation on a square with boundary control, `j` transverse modes.
    Heat2DBoundary { j: usize },
}

impl ExampleId {
    pub fn name(&self) -> &'static str {
        match self {
            ExampleId::Heat1D => "heat1d",
            ExampleId::Heat1DUnboundedB => "heat1d-unbounded",
            ExampleId::Beam1D => "beam",
            ExampleId::Heat2DBoundary { .. } => "heat2d",
        }
    }

    /// Parses `heat1d`, `heat1d-unbounded`, `beam`, `heat2d` or `heat2d:J`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s.as_str(), None),
        };
        let id = match head {
            "heat1d" | "heat" => ExampleId::Heat1D,
            "heat1d-unbounded" | "unbounded" => ExampleId::Heat1DUnboundedB,
            "beam" | "beam1d" => ExampleId::Beam1D,
            "heat2d" => {
                let j = match tail {
                    Some(t) => t
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad mode count '{t}'")))?,
                    None => 4,
                };
                if j == 0 || j > MAX_BOUNDARY_MODES {
                    return Err(Error::Config(format!(
                        "mode count must lie in 1..=8, got {j}"
                    )));
                }
                return Ok(ExampleId::Heat2DBoundary { j });
            }
            other => return Err(Error::Config(format!("unknown example '{other}'"))),
        };
        if tail.is_some() {
            return Err(Error::Config(format!("example '{head}' takes no suffix")));
        }
        Ok(id)
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleParams {
    /// Number of grid cells.
    pub mesh: usize,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self { mesh: 100 }
    }
}

/// Fully assembled example.
#[derive(Debug)]
pub struct ExampleProblem {
    pub id: ExampleId,
    pub spec: ParametricLQR,
    pub operator: BandedOperator,
    pub interval: SpectralInterval,
    pub length: f64,
}

pub fn unit_interval() -> SpectralInterval {
    SpectralInterval::new(0.0, 1.0).expect("valid interval")
}

/// Boundary-mode control weights `(√2/π)/j`, `j = 1..=count`.
pub fn boundary_weights(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| libm::sqrt(2.0) / PI / j as f64)
        .collect()
}

fn heat2d_spec(j: usize) -> Result<ParametricLQR> {
    let weights = boundary_weights(j);
    ParametricLQR::new(
        Box::new(move |l| {
            DMatrix::from_fn(j, j, |r, c| {
                if r == c {
                    let k = (r + 1) as f64;
                    -(k * k * PI * PI + 1.0 / l)
                } else {
                    0.0
                }
            })
        }),
        Box::new(move |_| DMatrix::from_column_slice(j, 1, &weights)),
        Box::new(move |_| DMatrix::identity(j, j)),
        Box::new(|_| DMatrix::identity(1, 1)),
        unit_interval(),
        None,
    )
}

fn beam_spec() -> Result<ParametricLQR> {
    ParametricLQR::new(
        Box::new(|l| {
            let m = 1.0 / libm::sqrt(l);
            DMatrix::from_row_slice(2, 2, &[0.0, m, -m, 0.0])
        }),
        Box::new(|_| DMatrix::from_column_slice(2, 1, &[0.0, 1.0])),
        Box::new(|_| DMatrix::from_row_slice(1, 2, &[1.0, 0.0])),
        Box::new(|_| DMatrix::identity(1, 1)),
        unit_interval(),
        None,
    )
}

/// Builds symbols, spectral interval and grid operator for `id`.
pub fn build_example(id: ExampleId, params: ExampleParams) -> Result<ExampleProblem> {
    let cfg = |e: Error| Error::Config(format!("{e}"));
    let (spec, operator, length) = match id {
        ExampleId::Heat1D => (
            ParametricLQR::scalar(
                |l| -1.0 / l,
                |_| 1.0,
                |_| 1.0,
                |_| 1.0,
                unit_interval(),
                None,
            )?,
            laplacian_1d_dirichlet(params.mesh, PI).map_err(cfg)?,
            PI,
        ),
        ExampleId::Heat1DUnboundedB => {
            let iso = Isomorphisms {
                phi_v: Box::new(|l| l),
                phi_v_dual: Box::new(|_| 1.0),
                phi_z: Box::new(libm::sqrt),
            };
            (
                ParametricLQR::scalar(
                    |_| 1.0,
                    |_| 1.0,
                    |_| 1.0,
                    |_| 1.0,
                    unit_interval(),
                    Some(iso),
                )?,
                laplacian_1d_dirichlet(params.mesh, PI).map_err(cfg)?,
                PI,
            )
        }
        ExampleId::Beam1D => (
            beam_spec()?,
            biharmonic_1d_clamped(params.mesh, BEAM_LENGTH).map_err(cfg)?,
            BEAM_LENGTH,
        ),
        ExampleId::Heat2DBoundary { j } => {
            if j == 0 || j > MAX_BOUNDARY_MODES {
                return Err(Error::Config(format!(
                    "mode count must lie in 1..=8, got {j}"
                )));
            }
            (
                heat2d_spec(j)?,
                laplacian_1d_dirichlet(params.mesh, PI).map_err(cfg)?,
                PI,
            )
        }
    };
    Ok(ExampleProblem {
        id,
        spec,
        operator,
        interval: unit_interval(),
        length,
    })
}

/// `p(λ) = (−1 + √(1 + λ²))/λ`, written without cancellation.
pub fn heat1d_exact(l: f64) -> f64 {
    l / (1.0 + libm::sqrt(1.0 + l * l))
}

/// `k₁(λ) = (−1 + √(1 + λ))/λ`, written without cancellation.
pub fn beam_k1(l: f64) -> f64 {
    1.0 / (1.0 + libm::sqrt(1.0 + l))
}

/// `k₂ = √(2 k₁)`.
pub fn beam_k2(l: f64) -> f64 {
    libm::sqrt(2.0 * beam_k1(l))
}

/// Nonnegative root of `λp² − 2p − 1 = 0`.
pub fn unbounded_exact(l: f64) -> f64 {
    (1.0 + libm::sqrt(1.0 + l)) / l
}

/// Reference symbol evaluator.
///
/// Returns `p` for the scalar heat examples, `(k₁, k₂)` for the beam and the
/// gain row `bᵀp` for the boundary-controlled heat example.
pub struct ReferenceGain {
    pub components: usize,
    /// Zero for closed forms, otherwise the pointwise solver tolerance.
    pub tolerance: f64,
    eval: Box<dyn Fn(f64) -> Result<Vec<f64>> + Send + Sync>,
}

impl core::fmt::Debug for ReferenceGain {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ReferenceGain")
            .field("components", &self.components)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl ReferenceGain {
    pub fn eval(&self, l: f64) -> Result<Vec<f64>> {
        (self.eval)(l)
    }

    pub fn component(&self, k: usize, l: f64) -> Result<f64> {
        Ok(self.eval(l)?[k])
    }
}

pub fn reference_gain(id: ExampleId) -> Result<ReferenceGain> {
    Ok(match id {
        ExampleId::Heat1D => ReferenceGain {
            components: 1,
            tolerance: 0.0,
            eval: Box::new(|l| Ok(vec![heat1d_exact(l)])),
        },
        ExampleId::Heat1DUnboundedB => ReferenceGain {
            components: 1,
            tolerance: 0.0,
            eval: Box::new(|l| Ok(vec![unbounded_exact(l)])),
        },
        ExampleId::Beam1D => ReferenceGain {
            components: 2,
            tolerance: 0.0,
            eval: Box::new(|l| Ok(vec![beam_k1(l), beam_k2(l)])),
        },
        ExampleId::Heat2DBoundary { j } => {
            let spec = heat2d_spec(j)?;
            ReferenceGain {
                components: j,
                tolerance: REFERENCE_TOL,
                eval: Box::new(move |l| {
                    let sol = are_pointwise(&spec, l, REFERENCE_TOL)?;
                    Ok(gain_pointwise(&spec, &sol)?.iter().copied().collect())
                }),
            }
        }
    })
}

/// Gain rows `bᵀp` at increasing `lambdas`, warm-starting each solve from the previous one.
pub fn gain_sweep(spec: &ParametricLQR, lambdas: &[f64], tol: f64) -> Result<Vec<DMatrix<f64>>> {
    let mut prev: Option<DMatrix<f64>> = None;
    let mut out = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let sol = are_pointwise_from(spec, l, tol, prev.as_ref())?;
        out.push(gain_pointwise(spec, &sol)?);
        prev = Some(sol.p);
    }
    Ok(out)
}

/// Runs the semi-implicit Galerkin iteration from zero for the heat or beam example.
pub fn galerkin_example(id: ExampleId, degree: usize) -> Result<GalerkinOutput> {
    let iv = unit_interval();
    let zero = SpectralFunction::zero(iv, degree);
    match id {
        ExampleId::Heat1D => galerkin_semi_implicit(
            WeakForm::Example1Scalar,
            &[degree],
            &[zero],
            GALERKIN_EPS,
            GALERKIN_MAX_ITER,
        ),
        ExampleId::Beam1D => galerkin_semi_implicit(
            WeakForm::Example3Coupled,
            &[degree, degree],
            &[zero.clone(), zero],
            GALERKIN_EPS,
            GALERKIN_MAX_ITER,
        ),
        other => Err(Error::Config(format!(
            "no Galerkin weak form for '{}'",
            other.name()
        ))),
    }
}

/// Example label used in file names and reports.
pub fn example_label(id: ExampleId) -> String {
    match id {
        ExampleId::Heat2DBoundary { j } => format!("heat2d-j{j}"),
        other => other.name().into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!(ExampleId::parse("heat1d").unwrap(), ExampleId::Heat1D);
        assert_eq!(
            ExampleId::parse("heat2d").unwrap(),
            ExampleId::Heat2DBoundary { j: 4 }
        );
        assert_eq!(
            ExampleId::parse("heat2d:2").unwrap(),
            ExampleId::Heat2DBoundary { j: 2 }
        );
        assert!(ExampleId::parse("heat2d:9").is_err());
        assert!(ExampleId::parse("plate").is_err());
    }

    #[test]
    fn symbols() {
        let heat = build_example(ExampleId::Heat1D, ExampleParams::default()).unwrap();
        assert_eq!((heat.spec.a)(1.0)[(0, 0)], -1.0);
        let beam = build_example(ExampleId::Beam1D, ExampleParams::default()).unwrap();
        let a = (beam.spec.a)(0.25);
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]));
        assert_eq!(beam.spec.n_z, 2);
        let h2 =
            build_example(ExampleId::Heat2DBoundary { j: 2 }, ExampleParams::default()).unwrap();
        let b = (h2.spec.b)(1.0);
        let c = libm::sqrt(2.0) / PI;
        assert!((b[(0, 0)] - c).abs() < 1e-15 && (b[(1, 0)] - c / 2.0).abs() < 1e-15);
        let a = (h2.spec.a)(1.0);
        assert!((a[(0, 0)] + PI * PI + 1.0).abs() < 1e-12);
        assert!((a[(1, 1)] + 4.0 * PI * PI + 1.0).abs() < 1e-12);
        assert_eq!(a[(0, 1)], 0.0);
        assert!(build_example(ExampleId::Heat1D, ExampleParams { mesh: 2 }).is_err());
    }

    #[test]
    fn references() {
        let r = reference_gain(ExampleId::Heat1D).unwrap();
        assert!((r.component(0, 1.0).unwrap() - (libm::sqrt(2.0) - 1.0)).abs() < 1e-15);
        let b = reference_gain(ExampleId::Beam1D)
            .unwrap()
            .eval(1.0)
            .unwrap();
        assert!((b[0] - (libm::sqrt(2.0) - 1.0)).abs() < 1e-15);
        assert!((b[1] - libm::sqrt(2.0 * (libm::sqrt(2.0) - 1.0))).abs() < 1e-15);
        let u = reference_gain(ExampleId::Heat1DUnboundedB).unwrap();
        assert!((u.component(0, 3.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn beam_gain_matches_closed_forms() {
        let beam = build_example(ExampleId::Beam1D, ExampleParams::default()).unwrap();
        for l in [0.1, 0.5, 1.0] {
            let sol = are_pointwise(&beam.spec, l, 1e-12).unwrap();
            let q = gain_pointwise(&beam.spec, &sol).unwrap();
            // The first state component is Λ^{-1/2} w, so q₁ = λ^{1/2} k₁.
            assert!((q[(0, 0)] / libm::sqrt(l) - beam_k1(l)).abs() < 1e-11);
            assert!((q[(0, 1)] - beam_k2(l)).abs() < 1e-11);
        }
    }

    #[test]
    fn unbounded_example_root() {
        let ex = build_example(ExampleId::Heat1DUnboundedB, ExampleParams::default()).unwrap();
        for l in crate::approx::logspace(-2.0, 0.0, 50) {
            let sol = are_pointwise(&ex.spec, l, 1e-9).unwrap();
            assert!(
                (sol.p[(0, 0)] - unbounded_exact(l)).abs() <= 1e-10 * unbounded_exact(l).max(1.0)
            );
        }
    }
}
