//! Semi-decentralized approximation of LQR optimal controllers for
//! distributed-parameter systems.
//!
//! The gain of an LQR problem whose operators are functions of a
//! self-adjoint operator `Λ` is itself a function `k(Λ)`. This crate solves
//! the parametric algebraic Riccati equation in the scalar spectral
//! parameter, approximates the resulting gain symbol by polynomials or
//! rational functions, and applies it to a banded discrete operator through
//! trapezoidal quadrature of the Cauchy integral. Every node of that
//! quadrature only needs a banded shifted solve, so the realization stays
//! local on a grid of processors.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel study drivers live in the `semidec` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
pub mod are;
pub mod band;
pub mod contour;
pub mod dense;
pub mod discrete;
pub mod error;
pub mod harness;
pub mod spectral;

pub use error::{Error, Result};

pub use num_complex::Complex64;
