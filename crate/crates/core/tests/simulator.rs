use approx::assert_relative_eq;
use proptest::prelude::*;
use qdot_cluster::schedule::{
    gen_2d_three_step, gen_m_step, gen_one_step, gen_three_step, net_coupling,
};
use qdot_cluster::simulator::{
    cluster_state, evolve, evolve_phases, fidelity, fidelity_analytic, fidelity_enumerated,
    fidelity_transfer, initial_state, residual_phases, schedule_fidelity,
};
use qdot_cluster::{ratio, CouplingMatrix, Lattice, MoleculeGeometry, PhaseFunction, Rational};

fn geom() -> MoleculeGeometry {
    MoleculeGeometry::default()
}

#[test]
fn ideal_coupling_builds_cluster_state() {
    for lattice in [
        Lattice::chain(7).unwrap(),
        Lattice::grid(3, 3).unwrap(),
        Lattice::grid(2, 4).unwrap(),
    ] {
        let out = evolve(
            &initial_state(lattice.len()).unwrap(),
            &CouplingMatrix::ideal(lattice),
            &geom(),
        )
        .unwrap();
        let target = cluster_state(lattice).unwrap();
        assert!(out.max_abs_diff(&target).unwrap() < 1e-14);
        assert_relative_eq!(fidelity(&out, &target).unwrap(), 1.0, epsilon = 1e-13);
    }
}

#[test]
fn one_step_on_two_qubits_is_exact() {
    let lattice = Lattice::chain(2).unwrap();
    let f = schedule_fidelity(&net_coupling(&gen_one_step(lattice)).unwrap(), &geom()).unwrap();
    assert_relative_eq!(f, 1.0, epsilon = 1e-14);
}

#[test]
fn evolution_preserves_norm() {
    let sched = gen_three_step(Lattice::chain(12).unwrap(), 1).unwrap();
    let out = evolve(
        &initial_state(12).unwrap(),
        &net_coupling(&sched).unwrap(),
        &geom(),
    )
    .unwrap();
    assert_relative_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
}

#[test]
fn fidelity_ordering_over_sizes() {
    for n in [6, 8, 10, 12, 14] {
        let lattice = Lattice::chain(n).unwrap();
        let f = |s| schedule_fidelity(&net_coupling(&s).unwrap(), &geom()).unwrap();
        let one = f(gen_one_step(lattice));
        let three = f(gen_three_step(lattice, 0).unwrap());
        let eight = f(gen_m_step(lattice, 8, 0).unwrap());
        assert!(
            eight >= three && three > one,
            "N={n}: {eight} {three} {one}"
        );
    }
}

#[test]
fn grid_fidelity_unaffected_by_diagonals() {
    // diagonal coefficients are exactly zero, so zeroing them is a no-op
    let lattice = Lattice::grid(3, 3).unwrap();
    let coupling = net_coupling(&gen_2d_three_step(lattice, (0, 0)).unwrap()).unwrap();
    let mut stripped = coupling.clone();
    for p in 0..lattice.len() {
        for q in p + 1..lattice.len() {
            if lattice.separation_sq(p, q) == 2 {
                stripped.set(p, q, Rational::from_integer(0.into()));
            }
        }
    }
    assert_eq!(
        schedule_fidelity(&coupling, &geom()).unwrap(),
        schedule_fidelity(&stripped, &geom()).unwrap()
    );
    // and the remaining error comes from separations of two or more
    let mut far_only = CouplingMatrix::ideal(lattice);
    for (p, q, c) in coupling.pairs() {
        if lattice.separation_sq(p, q) > 2 {
            far_only.set(p, q, c.clone());
        }
    }
    assert_eq!(
        schedule_fidelity(&coupling, &geom()).unwrap(),
        schedule_fidelity(&far_only, &geom()).unwrap()
    );
}

#[test]
fn closed_form_agrees_on_schedules() {
    for n in [4, 9, 13] {
        let lattice = Lattice::chain(n).unwrap();
        for sched in [gen_one_step(lattice), gen_three_step(lattice, 0).unwrap()] {
            let c = net_coupling(&sched).unwrap();
            let engine = schedule_fidelity(&c, &geom()).unwrap();
            let closed = fidelity_analytic(&residual_phases(&c, &geom()).unwrap()).unwrap();
            assert_relative_eq!(engine, closed, epsilon = 1e-12);
        }
    }
}

#[test]
fn transfer_handles_long_chains() {
    // 26 qubits with residuals up to separation 4: beyond dense simulation
    let n = 26;
    let mut delta = PhaseFunction::zeros(n);
    for p in 0..n {
        for k in 2..=4 {
            if p + k < n {
                delta.set(p, p + k, 0.05 / k as f64);
            }
        }
    }
    let a = fidelity_transfer(&delta).unwrap();
    let b = fidelity_enumerated(&delta).unwrap();
    assert_relative_eq!(a, b, epsilon = 1e-10);
    assert!(a > 0.0 && a < 1.0);
}

fn arb_delta(n: usize) -> impl Strategy<Value = PhaseFunction> {
    proptest::collection::vec(-3.0f64..3.0, n * (n - 1) / 2).prop_map(move |v| {
        let mut d = PhaseFunction::zeros(n);
        let mut it = v.into_iter();
        for p in 0..n {
            for q in p + 1..n {
                d.set(p, q, it.next().unwrap());
            }
        }
        d
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_closed_form(delta in (2usize..10).prop_flat_map(arb_delta)) {
        let n = delta.num_qubits();
        let lattice = Lattice::chain(n).unwrap();
        let ideal = PhaseFunction::ideal(lattice);
        let mut full = ideal.clone();
        for p in 0..n {
            for q in p + 1..n {
                full.set(p, q, ideal.get(p, q) + delta.get(p, q));
            }
        }
        let engine = fidelity(
            &evolve_phases(&initial_state(n).unwrap(), &full).unwrap(),
            &cluster_state(lattice).unwrap(),
        ).unwrap();
        prop_assert!((engine - fidelity_analytic(&delta).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn coupling_then_negation_is_identity(vals in proptest::collection::vec(-8i64..8, 15)) {
        let lattice = Lattice::chain(6).unwrap();
        let mut c = CouplingMatrix::zeros(lattice);
        let mut it = vals.into_iter();
        for p in 0..6 {
            for q in p + 1..6 {
                c.set(p, q, ratio(it.next().unwrap(), 3));
            }
        }
        let start = initial_state(6).unwrap();
        let back = evolve(&evolve(&start, &c, &geom()).unwrap(), &-c.clone(), &geom()).unwrap();
        prop_assert!(back.max_abs_diff(&start).unwrap() < 1e-12);
    }
}
