//! Voronoi summation machinery for GL(n) over the rationals.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`] - modular arithmetic, Dirichlet characters, Gauss and Kloosterman sums.
//! * [`padic`] - p-adic numbers with rational units, shell functions, Mellin analysis.
//! * [`series`] - Laurent series and rational functions in `X = q^{-s}`.
//! * [`local_reps`] - Schur polynomials, Hecke coefficients, local L, epsilon and gamma factors.
//! * [`bessel_padic`] - the p-adic Bessel transform engine and its closed forms.
//! * [`kloosterman_geometric`] - local hyper-Kloosterman sums and the Whittaker integral oracle.
//! * [`bessel_arch`] - the real Bessel transform by Mellin-Barnes contour integration.
//! * [`voronoi`] - classical summation formulae and coefficient sources.
//! * [`verify`] - the timed acceptance suite.

pub mod arith;
pub mod bessel_arch;
pub mod bessel_padic;
pub mod error;
pub mod kloosterman_geometric;
pub mod local_reps;
pub mod padic;
pub mod series;
pub mod verify;
pub mod voronoi;

pub use error::{Error, Result};
pub use num_complex::Complex64;
