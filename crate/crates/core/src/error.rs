use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at {location}: {what}")]
    Evaluation { location: f64, what: String },

    #[error("reference norm is zero")]
    DivisionDegenerate,

    #[error("no stabilizing Riccati solution at lambda = {lambda}")]
    SolverFailure { lambda: f64 },

    #[error("no convergence after {iterations} iterations")]
    ConvergenceFailure { iterations: usize, trace: Vec<f64> },

    #[error("singular Galerkin system: {0}")]
    AssemblyFailure(String),

    #[error("invalid problem data: {0}")]
    InvalidSpec(String),

    #[error("monomial conversion beyond degree {max} is ill-conditioned (requested {degree})")]
    Conditioning { degree: usize, max: usize },

    #[error("least-squares fit is ambiguous: null space of dimension {nullity}")]
    AmbiguousFit { nullity: usize },

    #[error("denominator root {pole} lies in the spectral interval")]
    PoleInInterval { pole: Complex64 },

    #[error("rational function evaluated at a pole ({at})")]
    PoleEvaluation { at: Complex64 },

    #[error("spectral point {point} is not enclosed by the contour")]
    SpectrumNotEnclosed { point: f64 },

    #[error("pole {pole} is enclosed by the contour")]
    PoleEnclosed { pole: Complex64 },

    #[error("shifted system at quadrature node {node} is singular")]
    ShiftSingular { node: usize },

    #[error("numerical failure: {0}")]
    NumericFailure(String),

    #[error("locality violation: row {row} reads column {col} (allowed radius {radius})")]
    StructuralFailure {
        row: usize,
        col: usize,
        radius: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
