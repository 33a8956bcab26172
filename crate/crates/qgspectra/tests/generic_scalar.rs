//! The numeric core is generic over the scalar; exercise the `f32`
//! instantiation end to end at tolerances matching its precision.

use qgspectra::bootstrap::{descend_hierarchy, oracle_scan};
use qgspectra::detpoly::graph_trigpoly;
use qgspectra::families::{reference_two_bond_graph, reference_two_bond_poly};
use qgspectra::graph::Graph;
use qgspectra::trigpoly::TrigPoly;

#[test]
fn f32_pipeline_reproduces_f64_roots_at_single_precision() {
    let poly32: TrigPoly<f32> = reference_two_bond_poly();
    let poly64: TrigPoly<f64> = reference_two_bond_poly();

    let h32 = descend_hierarchy(&poly32, 1, 20).unwrap();
    let h64 = descend_hierarchy(&poly64, 1, 20).unwrap();
    assert_eq!(h32.roots.len(), h64.roots.len());
    for (a, b) in h32.roots.iter().zip(&h64.roots) {
        assert!(
            (f64::from(a.k) - b.k).abs() < 1e-4 * b.k.max(1.0),
            "n = {}: {} vs {}",
            a.n,
            a.k,
            b.k
        );
    }
}

#[test]
fn f32_graph_expansion_and_oracle() {
    let g: Graph<f32> = reference_two_bond_graph();
    let red = graph_trigpoly(&g).unwrap();
    assert!((red.poly.gamma0() - 0.5).abs() < 1e-5);
    let roots = oracle_scan(&red.poly, 1e-3f32, 10.0, 128);
    assert!(!roots.is_empty());
    for k in roots {
        assert!(red.poly.eval(k).abs() < 1e-4);
    }
}
