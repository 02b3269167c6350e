use std::time::Instant;

use lattice_spectral::operators::apply_laplacian;
use lattice_spectral::ucp::{
    boundary_graph_from_box, boundary_graph_from_cube, check_a5, dirichlet_neumann_nullity,
    extreme_points, kagome_flat_band_vector, kagome_hexagon_rings, kagome_ring_values,
    neumann_residual, two_points_condition, two_points_condition_with, BoundaryGraph, SearchMode,
    Verdict,
};
use lattice_spectral::{builtin_lattice, BuiltinLattice};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(kind: BuiltinLattice) -> lattice_spectral::LatticeSpec {
    builtin_lattice(kind, 2).unwrap()
}

#[test]
fn square_block_two_points_is_fast() {
    let g = boundary_graph_from_box(&lattice(BuiltinLattice::Square), 2f64.sqrt()).unwrap();
    assert_eq!(g.interior_len(), 9);
    let t = Instant::now();
    let r = two_points_condition(&g, &SearchMode::Exhaustive).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0);
    assert_eq!(r.verdict, Verdict::Holds);
    assert_eq!(r.subsets_checked, (1 << 9) - 1 - 9);
}

#[test]
fn kagome_ring_is_a_witness() {
    let spec = lattice(BuiltinLattice::Kagome);
    let g = boundary_graph_from_cube(&spec, 2).unwrap();
    let rings = kagome_hexagon_rings(&spec, &g).unwrap();
    assert!(!rings.is_empty());
    for ring in &rings {
        assert!(extreme_points(&g, ring).is_empty());
    }
    let r = two_points_condition_with(
        &g,
        &SearchMode::Random {
            samples: 10,
            seed: 1,
        },
        &rings,
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    assert_eq!(r.witness.as_ref(), Some(&rings[0]));
    assert!(r.witness_extreme_points.is_empty());
}

#[test]
fn random_mode_never_claims_the_condition() {
    let g = boundary_graph_from_box(&lattice(BuiltinLattice::Square), 2f64.sqrt()).unwrap();
    let r = two_points_condition(
        &g,
        &SearchMode::Random {
            samples: 200,
            seed: 9,
        },
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::NoCounterexampleFound);
    assert_eq!(r.verdict.as_str(), "no counterexample found");
}

fn graphs_satisfying_both() -> Vec<BoundaryGraph> {
    let candidates = [
        boundary_graph_from_box(&lattice(BuiltinLattice::Square), 2f64.sqrt()).unwrap(),
        boundary_graph_from_box(&lattice(BuiltinLattice::Square), 1.0).unwrap(),
        boundary_graph_from_cube(&lattice(BuiltinLattice::Triangular), 1).unwrap(),
        boundary_graph_from_cube(&lattice(BuiltinLattice::Hexagonal), 1).unwrap(),
        boundary_graph_from_box(&lattice(BuiltinLattice::Triangular), 1.0).unwrap(),
    ];
    candidates
        .into_iter()
        .filter(|g| {
            check_a5(g).passed()
                && two_points_condition(g, &SearchMode::Exhaustive)
                    .unwrap()
                    .verdict
                    == Verdict::Holds
        })
        .collect()
}

#[test]
fn nullity_vanishes_under_both_hypotheses() {
    let graphs = graphs_satisfying_both();
    assert!(
        graphs.len() >= 2,
        "only {} graphs satisfy both",
        graphs.len()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..100 {
        let g = &graphs[i % graphs.len()];
        let v: Vec<f64> = (0..g.interior_len())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let lambda = rng.random_range(-2.0..2.0);
        assert_eq!(dirichlet_neumann_nullity(g, &v, lambda).unwrap(), 0);
    }
}

#[test]
fn kagome_flat_band_instance_has_kernel() {
    let spec = lattice(BuiltinLattice::Kagome);
    let g = boundary_graph_from_cube(&spec, 1).unwrap();
    let n = g.interior_len();
    assert!(dirichlet_neumann_nullity(&g, &vec![0.0; n], 0.5).unwrap() >= 1);
    assert_eq!(
        dirichlet_neumann_nullity(&g, &vec![0.0; n], 0.3).unwrap(),
        0
    );
}

#[test]
fn flat_band_vector_on_radius_three_patch() {
    let spec = lattice(BuiltinLattice::Kagome);
    let f = kagome_flat_band_vector(&spec, &[0, 0], 3.0).unwrap();
    let mut worst: f64 = 0.0;
    for v in spec.box_vertices(4.0) {
        let r = -apply_laplacian(&spec, &f, &v).unwrap() - 0.5 * f.get(&v);
        worst = worst.max(r.norm());
    }
    assert!(worst <= 1e-14, "{worst}");

    let g = boundary_graph_from_box(&spec, 3.0).unwrap();
    let vals = g.values_of(&f).unwrap();
    for z in g.interior_len()..g.len() {
        assert_eq!(vals[z], Complex64::new(0.0, 0.0));
        assert!(neumann_residual(&g, &vals, z).unwrap().norm() <= 1e-14);
    }
    assert!(kagome_flat_band_vector(&spec, &[0, 0], 1.0).is_err());
}

#[test]
fn ring_values_solve_the_boundary_problem() {
    let spec = lattice(BuiltinLattice::Kagome);
    let g = boundary_graph_from_cube(&spec, 2).unwrap();
    let vals = kagome_ring_values(&spec, &g, &[0, 0]).unwrap();
    let pot = vec![0.0; g.interior_len()];
    for v in 0..g.interior_len() {
        let r = lattice_spectral::ucp::interior_residual(&g, &pot, 0.5, &vals, v);
        assert!(r.norm() <= 1e-14);
    }
    for z in g.interior_len()..g.len() {
        assert_eq!(vals[z].norm(), 0.0);
        assert!(neumann_residual(&g, &vals, z).unwrap().norm() <= 1e-14);
    }
}
