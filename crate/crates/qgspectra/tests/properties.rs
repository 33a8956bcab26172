//! Property tests for the structural invariants.

use proptest::prelude::*;

use qgspectra::bootstrap::{oracle_scan, regular_separators};
use qgspectra::detpoly::{expand_determinant, reconstruction_residual, to_real_form};
use qgspectra::families::{four_vertex_chain_poly, two_bond_graph};
use qgspectra::graph::from_string_network;
use qgspectra::orbits::{canonical_rotation, word_period};
use qgspectra::trigpoly::{TrigPoly, TrigTerm};
use qgspectra::{Graph64, TrigPoly64};

fn arb_poly() -> impl Strategy<Value = TrigPoly64> {
    (
        0.5f64..2.0,
        0.0f64..2.0,
        proptest::collection::vec((0.01f64..1.2, 0.05f64..0.9, 0.0f64..2.0), 0..4),
    )
        .prop_map(|(s0, gamma0, raw)| {
            let terms = raw
                .into_iter()
                .map(|(a, eps, gamma)| TrigTerm { a, s: eps * s0, gamma })
                .collect();
            TrigPoly::new(s0, gamma0, terms).expect("valid random terms")
        })
}

proptest! {
    /// Differentiation composes exactly: the amplitude/phase bookkeeping of
    /// a split derivative is bit-identical to the direct one.
    #[test]
    fn derivative_composition_exact(p in arb_poly(), a in 0u32..6, b in 0u32..6) {
        prop_assert_eq!(p.differentiate(a).differentiate(b), p.differentiate(a + b));
    }

    /// The characteristic sum strictly decreases with the level while it is
    /// positive (all frequency ratios are below one).
    #[test]
    fn alpha_strictly_decreases(p in arb_poly(), l in 0u32..8) {
        let now = p.differentiate(l).characteristic_sum();
        let next = p.differentiate(l + 1).characteristic_sum();
        if now > 0.0 {
            prop_assert!(next < now, "alpha {} -> {}", now, next);
        } else {
            prop_assert_eq!(next, 0.0);
        }
    }

    /// The reported degree satisfies its defining inequalities.
    #[test]
    fn degree_inequalities(p in arb_poly()) {
        let (m, bound) = p.irregularity_degree().unwrap();
        prop_assert!(m <= bound);
        prop_assert!(p.differentiate(m).characteristic_sum() < 1.0);
        if m > 0 {
            prop_assert!(p.differentiate(m - 1).characteristic_sum() >= 1.0);
        }
    }

    /// JSON interchange round-trips the polynomial exactly.
    #[test]
    fn json_roundtrip_identity(p in arb_poly()) {
        let text = serde_json::to_string(&p.to_file()).unwrap();
        let back: qgspectra::trigpoly::TrigPolyFile = serde_json::from_str(&text).unwrap();
        let q: TrigPoly64 = back.into_poly().unwrap();
        prop_assert_eq!(p, q);
    }

    /// Level-l evaluation equals the central finite difference of level
    /// l-1, scaled by S0.
    #[test]
    fn derivative_matches_finite_difference(p in arb_poly(), k in 0.1f64..80.0) {
        let d = p.differentiate(1);
        let h = 1e-6;
        let fd = (p.eval(k + h) - p.eval(k - h)) / (2.0 * h) / p.s0();
        let an = d.eval(k);
        prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "fd {} vs {}", fd, an);
    }

    /// Word periods recompose the original word.
    #[test]
    fn word_period_recomposes(base in proptest::collection::vec(0usize..6, 1..5), nu in 1usize..4) {
        let word: Vec<usize> = base.iter().cycle().take(base.len() * nu).copied().collect();
        let (p, n) = word_period(&word);
        prop_assert_eq!(p * n, word.len());
        let rebuilt: Vec<usize> = word[..p].iter().cycle().take(word.len()).copied().collect();
        prop_assert_eq!(rebuilt, word);
    }

    /// The canonical rotation is invariant under rotation.
    #[test]
    fn canonical_rotation_invariant(word in proptest::collection::vec(0usize..8, 1..8), shift in 0usize..8) {
        let rotated: Vec<usize> = (0..word.len())
            .map(|i| word[(i + shift) % word.len()])
            .collect();
        prop_assert_eq!(canonical_rotation(&word), canonical_rotation(&rotated));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Exactly one oracle root between consecutive periodic separators of
    /// a regular polynomial.
    #[test]
    fn one_root_per_cell(
        s0 in 0.5f64..2.0,
        alpha in 0.05f64..0.9,
        seed in 0u64..1_000,
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let poly: TrigPoly64 =
            qgspectra::families::random_poly_with_alpha(&mut rng, s0, 3, alpha);
        let level = regular_separators(&poly, 1, 30).unwrap();
        let roots = oracle_scan(&poly, level.positions[0], *level.positions.last().unwrap(), 256);
        prop_assert_eq!(roots.len(), 30);
        for (c, w) in level.positions.windows(2).enumerate() {
            prop_assert!(w[0] < roots[c] && roots[c] < w[1]);
        }
    }

    /// The expanded determinant reconstructs from its real reduced form.
    #[test]
    fn reduction_reconstructs_expansion(
        s1 in 0.1f64..0.6,
        s2 in 0.1f64..0.6,
        r in -0.9f64..0.9,
        k in 0.0f64..60.0,
    ) {
        let g: Graph64 = two_bond_graph(s1, s2, r).unwrap();
        let exp = expand_determinant(&g).unwrap();
        let red = to_real_form(&exp).unwrap();
        prop_assert!(reconstruction_residual(&exp, &red, k) < 1e-9);
    }

    /// Rescaling all string densities by c and momenta by 1/sqrt(c) leaves
    /// the spectrum invariant.
    #[test]
    fn string_rescaling_invariance(c in 0.3f64..3.0) {
        let base = [(0.3, 1.0), (0.2, 2.0), (0.4, 0.5), (0.15, 1.7)];
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(l, e)| (l, c * e)).collect();
        let g0: Graph64 = from_string_network(&base, 1.0).unwrap();
        let g1: Graph64 = from_string_network(&scaled, 1.0).unwrap();
        let p0 = qgspectra::detpoly::graph_trigpoly(&g0).unwrap().poly;
        let p1 = qgspectra::detpoly::graph_trigpoly(&g1).unwrap().poly;
        let r0 = qgspectra::bootstrap::descend_hierarchy(&p0, 1, 12).unwrap();
        let r1 = qgspectra::bootstrap::descend_hierarchy(&p1, 1, 12).unwrap();
        let root_c = c.sqrt();
        for (a, b) in r0.roots.iter().zip(&r1.roots) {
            prop_assert!((b.k - a.k / root_c).abs() < 1e-10, "{} vs {}", b.k, a.k / root_c);
        }
    }

    /// The four-vertex chain degree depends only on |r2|, |r3|.
    #[test]
    fn four_vertex_degree_sign_symmetric(r2 in -1.0f64..1.0, r3 in -1.0f64..1.0) {
        let acts = [0.2, 0.6565, 0.1435];
        let m = |a: f64, b: f64| -> u32 {
            four_vertex_chain_poly(acts, a, b)
                .unwrap()
                .irregularity_degree()
                .unwrap()
                .0
        };
        let reference = m(r2, r3);
        prop_assert_eq!(reference, m(-r2, r3));
        prop_assert_eq!(reference, m(r2, -r3));
        prop_assert_eq!(reference, m(-r2, -r3));
    }
}
