//! Non-chain topology: a four-spoke star driven through the full pipeline
//! (expansion, reduction, classification, hierarchy, oracle, staircase).

use rand::{Rng, SeedableRng};

use qgspectra::bootstrap::{descend_hierarchy, oracle_scan};
use qgspectra::detpoly::{expand_determinant, graph_trigpoly, reconstruction_residual, to_real_form};
use qgspectra::graph::{build_graph, BondSpec, GraphSpec, ScatteringSpec, VertexOverride};
use qgspectra::orbits::{enumerate_orbits, trace_power};
use qgspectra::spectral::Staircase;
use qgspectra::Graph64;

fn star() -> Graph64 {
    // Incommensurate spoke lengths; hard-wall leaves, beta-weighted center.
    let spec = GraphSpec {
        vertices: vec!["c".into(), "l1".into(), "l2".into(), "l3".into(), "l4".into()],
        bonds: vec![
            BondSpec { from: "c".into(), to: "l1".into(), length: 0.23, lambda: 0.0 },
            BondSpec { from: "c".into(), to: "l2".into(), length: 0.31, lambda: 0.3 },
            BondSpec { from: "c".into(), to: "l3".into(), length: 0.17, lambda: -0.4 },
            BondSpec { from: "c".into(), to: "l4".into(), length: 0.29, lambda: 0.0 },
        ],
        scattering: ScatteringSpec::Kirchhoff {
            overrides: vec![
                ("l1".into(), VertexOverride::Dirichlet),
                ("l2".into(), VertexOverride::Dirichlet),
                ("l3".into(), VertexOverride::Dirichlet),
                ("l4".into(), VertexOverride::Dirichlet),
            ],
        },
    };
    build_graph(&spec).unwrap()
}

#[test]
fn star_expansion_matches_numeric_determinant() {
    let g = star();
    assert_eq!(g.n_directed(), 8);
    let exp = expand_determinant(&g).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let k = rng.gen_range(1e-3..100.0);
        let residual = (exp.eval(k) - g.numeric_delta(k).unwrap()).norm_sqr().sqrt();
        assert!(residual < 1e-9, "k = {k}: {residual}");
    }
    let red = to_real_form(&exp).unwrap();
    for _ in 0..200 {
        let k = rng.gen_range(0.0..80.0);
        assert!(reconstruction_residual(&exp, &red, k) < 1e-9);
    }
}

#[test]
fn star_hierarchy_matches_oracle() {
    let g = star();
    let red = graph_trigpoly(&g).unwrap();
    let (m, bound) = red.poly.irregularity_degree().unwrap();
    assert!(m <= bound);
    let h = descend_hierarchy(&red.poly, 1, 300).unwrap();
    assert_eq!(h.m, m);
    let hi = h.roots.last().unwrap().k + 0.4 * red.poly.mean_spacing();
    let oracle = oracle_scan(&red.poly, 1e-12, hi, 1000);
    assert_eq!(oracle.len(), 300, "root counts (m = {m})");
    for (rec, &o) in h.roots.iter().zip(&oracle) {
        assert!((rec.k - o).abs() < 1e-10, "n = {}: {} vs {o}", rec.n, rec.k);
    }
}

#[test]
fn star_staircase_counts_oracle_roots() {
    let g = star();
    let red = graph_trigpoly(&g).unwrap();
    let stair = Staircase::new(&g).unwrap();
    let roots = oracle_scan(&red.poly, 1e-9, 40.0, 512);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let k = rng.gen_range(0.5..39.0);
        if roots.iter().any(|&r| (r - k).abs() < 1e-5) {
            continue;
        }
        let n = stair.count(k).unwrap();
        assert!((n - n.round()).abs() < 1e-9, "N({k}) = {n}");
        let below = roots.iter().filter(|&&r| r < k).count();
        assert_eq!(n.round() as usize, below, "at k = {k}");
    }
}

#[test]
fn star_trace_identity() {
    let g = star();
    let catalog = enumerate_orbits(&g, 6).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for l in 1..=6 {
        for _ in 0..20 {
            let k = rng.gen_range(0.1..50.0);
            trace_power(&g, &catalog, l, k).unwrap();
        }
    }
}
