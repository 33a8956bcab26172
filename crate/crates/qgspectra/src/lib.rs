//! Exact spectra of scaling quantum graphs.
//!
//! A scaling quantum graph is a network of one-dimensional bonds whose bond
//! potentials are proportional to the energy, `U = lambda * E`. Its momentum
//! spectrum is the zero set of the spectral determinant `det(1 - S(k))`,
//! which reduces to a finite real trigonometric polynomial
//!
//! ```text
//! D(k) = cos(S0*k - pi*g0) - sum_i a_i * cos(S_i*k - pi*g_i),   S_i < S0.
//! ```
//!
//! The crate computes every root of `D` in an index window by the separator
//! bootstrap: differentiate `D` until the characteristic sum
//! `alpha = sum |a_i|` drops below one (the irregularity degree `m`), place
//! the periodic separators of the regular level, and walk the hierarchy back
//! down, solving one bracketed root per cell at each level. Cross-checks
//! come from a dense-scan oracle, contraction fixed-point iteration,
//! staircase integrals over the scattering eigenphases, convergent
//! periodic-orbit expansions, and Lagrange inversion.
//!
//! Everything is generic over the scalar type ([`num::Real`], i.e. `f32` or
//! `f64`); the `*64` aliases at the crate root pick the double-precision
//! instantiations used by the CLI and the test suites.

pub mod bootstrap;
pub mod config;
pub mod detpoly;
pub mod error;
pub mod families;
pub mod graph;
pub mod lagrange;
pub mod num;
pub mod orbits;
pub mod spectral;
pub mod stats;
pub mod trigpoly;

pub use error::{Error, Result};

/// Interchange schema version stamped into JSON artifacts.
pub const SCHEMA_VERSION: u32 = 1;

/// Double-precision graph.
pub type Graph64 = graph::Graph<f64>;
/// Double-precision exponential polynomial (expanded determinant).
pub type ExpPoly64 = detpoly::ExpPoly<f64>;
/// Double-precision reduced trigonometric polynomial.
pub type TrigPoly64 = trigpoly::TrigPoly<f64>;
/// Double-precision separator hierarchy.
pub type SeparatorHierarchy64 = bootstrap::SeparatorHierarchy<f64>;
/// Double-precision spectrum slice.
pub type SpectrumResult64 = bootstrap::SpectrumResult<f64>;
/// Double-precision orbit catalog.
pub type OrbitCatalog64 = orbits::OrbitCatalog<f64>;
