use approx::assert_relative_eq;
use proptest::prelude::*;
use qdot_cluster::geometry::PeriodicWeights;
use qdot_cluster::{ratio, Error, Lattice, MoleculeGeometry};

#[test]
fn g_decreases_with_separation() {
    let geom = MoleculeGeometry::default();
    let mut prev = geom.g(1).unwrap();
    assert_eq!(prev, 1.0);
    for k in 2..200 {
        let g = geom.g(k).unwrap();
        assert!(g < prev && g > 0.0, "k={k}");
        prev = g;
    }
}

#[test]
fn cubic_scaling_settles() {
    // k³·g(k) approaches a²/(b³·E₊(b)) from below
    let geom = MoleculeGeometry::default();
    let limit = geom.cubic_tail_constant();
    let scaled = |k: usize| (k as f64).powi(3) * geom.g(k).unwrap();
    assert!(scaled(50) <= limit);
    assert_relative_eq!(scaled(50), limit, max_relative = 1e-3);
    assert_relative_eq!(scaled(50), scaled(100), max_relative = 1e-3);
}

#[test]
fn residual_sum_stable_under_longer_truncation() {
    let geom = MoleculeGeometry::default();
    let w = PeriodicWeights::uniform(ratio(1, 1));
    let a = geom.residual_sum(&w, 10_000, 1e-6).unwrap();
    let b = geom.residual_sum(&w, 20_000, 1e-6).unwrap();
    assert!((a - b).abs() <= geom.tail_bound(1.0, 10_000));
    assert!(matches!(
        geom.residual_sum(&w, 10, 1e-6),
        Err(Error::TailBoundExceeded { .. })
    ));
}

#[test]
fn invalid_geometry_rejected() {
    assert!(MoleculeGeometry::new(0.0, 10.0).is_err());
    assert!(MoleculeGeometry::new(1.0, -2.0).is_err());
    assert!(MoleculeGeometry::new(f64::NAN, 10.0).is_err());
    let geom = MoleculeGeometry::default();
    assert!(geom.e_plus(0.0).is_err());
    assert!(geom.g_at(0.5).is_err());
}

#[test]
fn grid_distances() {
    let grid = Lattice::grid(3, 4).unwrap();
    let p = grid.site(0, 0);
    assert_eq!(grid.separation_sq(p, grid.site(1, 1)), 2);
    assert_eq!(grid.separation_sq(p, grid.site(2, 1)), 5);
    assert_relative_eq!(grid.separation(p, grid.site(2, 3)), 13f64.sqrt());
    assert_eq!(grid.nearest_edges().len(), 3 * 3 + 2 * 4);
    assert!(Lattice::chain(1).is_err());
}

proptest! {
    #[test]
    fn e_plus_is_small_difference(d in 1.5f64..1e4) {
        let geom = MoleculeGeometry::default();
        let ez = geom.e_zero(d).unwrap();
        let ep = geom.e_plus(d).unwrap();
        prop_assert!(ep > 0.0 && ep < ez);
        // E₊ ≈ a²/d³ for d ≫ a
        if d > 100.0 {
            prop_assert!((ep * d.powi(3) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn g_at_matches_integer_g(k in 1usize..500) {
        let geom = MoleculeGeometry::new(1.0, 7.0).unwrap();
        prop_assert_eq!(geom.g_at(k as f64).unwrap(), geom.g(k).unwrap());
    }
}
