//! Ready-made graph families and polynomial generators shared by the
//! solvers, the CLI, and the test suites.
//!
//! The two-bond chain (one interior reflection) and the four-vertex chain
//! (two interior reflections) are the canonical regular and tunably
//! irregular examples; both come with closed-form reduced polynomials that
//! double as independent cross-checks of the determinant expansion.

use rand::Rng;

use crate::error::Result;
use crate::graph::{build_graph, BondSpec, Graph, GraphSpec, ScatteringSpec};
use crate::num::{lit, Real};
use crate::trigpoly::{TrigPoly, TrigTerm};

/// Single bond with hard walls at both ends: the particle-in-a-box graph
/// with spectrum `k_n = n*pi/(beta*L)`.
pub fn single_bond_box<T: Real>(length: T) -> Result<Graph<T>> {
    let spec = GraphSpec {
        vertices: vec!["a".into(), "b".into()],
        bonds: vec![BondSpec { from: "a".into(), to: "b".into(), length, lambda: T::zero() }],
        scattering: ScatteringSpec::Kirchhoff {
            overrides: vec![
                ("a".into(), crate::graph::VertexOverride::Dirichlet),
                ("b".into(), crate::graph::VertexOverride::Dirichlet),
            ],
        },
    };
    build_graph(&spec)
}

/// Three-vertex chain: bonds with reduced actions `s1`, `s2` (lambda = 0,
/// so length equals action), reflection `r` at the middle vertex, hard
/// walls at the ends.
pub fn two_bond_graph<T: Real>(s1: T, s2: T, r: T) -> Result<Graph<T>> {
    let spec = GraphSpec {
        vertices: vec!["v1".into(), "v2".into(), "v3".into()],
        bonds: vec![
            BondSpec { from: "v1".into(), to: "v2".into(), length: s1, lambda: T::zero() },
            BondSpec { from: "v2".into(), to: "v3".into(), length: s2, lambda: T::zero() },
        ],
        scattering: ScatteringSpec::ChainReflections {
            reflections: vec![("v2".into(), r)],
        },
    };
    build_graph(&spec)
}

/// Reduced polynomial of the two-bond chain:
/// `sin(S0*k) - r*sin(S1*k)` with `S0 = s1 + s2`, `S1 = s1 - s2`.
pub fn two_bond_poly<T: Real>(s1: T, s2: T, r: T) -> Result<TrigPoly<T>> {
    let half = lit::<T>(0.5);
    TrigPoly::new(
        s1 + s2,
        half,
        vec![TrigTerm { a: r, s: s1 - s2, gamma: half }],
    )
}

/// Benchmark constants for the two-bond chain used throughout the tests:
/// `(s1, s2, r) = (0.3, 0.7/sqrt(2), (sqrt(2)-1)/(sqrt(2)+1))`, giving
/// `S0 = 0.3 + 0.7/sqrt(2)` and `S1 = 0.3 - 0.7/sqrt(2)`.
pub fn reference_two_bond_constants<T: Real>() -> (T, T, T) {
    let sqrt2 = lit::<T>(2.0).sqrt();
    let s1 = lit::<T>(0.3);
    let s2 = lit::<T>(0.7) / sqrt2;
    let r = (sqrt2 - T::one()) / (sqrt2 + T::one());
    (s1, s2, r)
}

/// The benchmark two-bond graph.
pub fn reference_two_bond_graph<T: Real>() -> Graph<T> {
    let (s1, s2, r) = reference_two_bond_constants();
    two_bond_graph(s1, s2, r).expect("benchmark parameters are valid")
}

/// The benchmark two-bond reduced polynomial.
pub fn reference_two_bond_poly<T: Real>() -> TrigPoly<T> {
    let (s1, s2, r) = reference_two_bond_constants();
    two_bond_poly(s1, s2, r).expect("benchmark parameters are valid")
}

/// Four-vertex chain with bond reduced actions `[s1, s2, s3]` (lambda = 0)
/// and interior reflections `r2`, `r3`; hard walls at the ends.
pub fn four_vertex_chain_graph<T: Real>(actions: [T; 3], r2: T, r3: T) -> Result<Graph<T>> {
    let spec = GraphSpec {
        vertices: vec!["v1".into(), "v2".into(), "v3".into(), "v4".into()],
        bonds: vec![
            BondSpec { from: "v1".into(), to: "v2".into(), length: actions[0], lambda: T::zero() },
            BondSpec { from: "v2".into(), to: "v3".into(), length: actions[1], lambda: T::zero() },
            BondSpec { from: "v3".into(), to: "v4".into(), length: actions[2], lambda: T::zero() },
        ],
        scattering: ScatteringSpec::ChainReflections {
            reflections: vec![("v2".into(), r2), ("v3".into(), r3)],
        },
    };
    build_graph(&spec)
}

/// Reduced polynomial of the four-vertex chain:
///
/// ```text
/// sin(S0*k) - r3*sin((s1+s2-s3)*k) + r2*r3*sin((s1-s2+s3)*k) - r2*sin((s1-s2-s3)*k)
/// ```
///
/// with `S0 = s1 + s2 + s3`; the amplitude magnitudes are
/// `(|r3|, |r2*r3|, |r2|)` after folding signs and negative frequencies.
pub fn four_vertex_chain_poly<T: Real>(actions: [T; 3], r2: T, r3: T) -> Result<TrigPoly<T>> {
    let [s1, s2, s3] = actions;
    let half = lit::<T>(0.5);
    TrigPoly::new(
        s1 + s2 + s3,
        half,
        vec![
            TrigTerm { a: r3, s: s1 + s2 - s3, gamma: half },
            TrigTerm { a: -(r2 * r3), s: s1 - s2 + s3, gamma: half },
            TrigTerm { a: r2, s: s1 - s2 - s3, gamma: half },
        ],
    )
}

/// The four-vertex chain as a two-parameter family over `(r2, r3)`.
#[derive(Debug, Clone, Copy)]
pub struct FourVertexChain<T> {
    pub actions: [T; 3],
}

impl<T: Real> FourVertexChain<T> {
    pub fn new(actions: [T; 3]) -> Self {
        Self { actions }
    }

    /// Reduced polynomial at reflection coordinates `(r2, r3)`.
    pub fn poly(&self, r2: T, r3: T) -> Result<TrigPoly<T>> {
        four_vertex_chain_poly(self.actions, r2, r3)
    }

    /// Full graph at reflection coordinates `(r2, r3)`.
    pub fn graph(&self, r2: T, r3: T) -> Result<Graph<T>> {
        four_vertex_chain_graph(self.actions, r2, r3)
    }
}

/// Random polynomial with a prescribed characteristic sum `alpha`.
///
/// Frequencies are drawn in `(0.05, 0.95) * S0` and separated by at least
/// `0.01 * S0` so merging never collapses terms; phases are uniform.
pub fn random_poly_with_alpha<T: Real, R: Rng>(
    rng: &mut R,
    s0: T,
    n_terms: usize,
    alpha: T,
) -> TrigPoly<T> {
    let gamma0 = lit::<T>(rng.gen_range(0.0..2.0));
    let mut freqs: Vec<f64> = Vec::with_capacity(n_terms);
    while freqs.len() < n_terms {
        let f = rng.gen_range(0.05..0.95);
        if freqs.iter().all(|&g| (g - f).abs() > 0.01) {
            freqs.push(f);
        }
    }
    let raw: Vec<f64> = (0..n_terms).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let terms = freqs
        .iter()
        .zip(&raw)
        .map(|(&f, &w)| TrigTerm {
            a: alpha * lit::<T>(w / total),
            s: s0 * lit::<T>(f),
            gamma: lit::<T>(rng.gen_range(0.0..2.0)),
        })
        .collect();
    TrigPoly::new(s0, gamma0, terms).expect("generated terms are valid")
}
