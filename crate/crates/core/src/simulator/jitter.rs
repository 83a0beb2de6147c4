//! Fidelity under random inter-molecule distance errors.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{cluster_state, evolve_phases, fidelity, initial_state, PhaseFunction};
use crate::geometry::MoleculeGeometry;
use crate::schedule::{net_coupling, Schedule};
use crate::{Error, Result};

/// Which pairs receive a perturbed distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JitterScope {
    AllPairs,
    /// Pairs at these separations, in units of `b` (squared distance `k²`).
    Separations(BTreeSet<usize>),
    /// Pairs whose net coefficient is exactly zero.
    ZeroCoefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JitterSample {
    pub seed: u64,
    pub jitter: f64,
    pub fidelity: f64,
    pub nominal_fidelity: f64,
    /// Pairs whose distance was perturbed.
    pub jittered_pairs: usize,
    /// Perturbed pairs with zero net coefficient; their phase stays exactly zero.
    pub immune_pairs: usize,
}

/// One jittered run: each in-scope pair distance `d_pq` becomes
/// `d_pq·(1 + η_pq)` with `η_pq ~ U(−jitter, jitter)`, drawn in lexicographic
/// pair order from a ChaCha8 stream seeded with `seed`.
///
/// The draw sequence depends only on the lattice and scope, so two schedules
/// on the same lattice see identical distance errors for the same seed.
pub fn perturbed_run(
    schedule: &Schedule,
    geom: &MoleculeGeometry,
    jitter: f64,
    seed: u64,
    scope: &JitterScope,
) -> Result<JitterSample> {
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(Error::InvalidJitter(jitter));
    }
    let coupling = net_coupling(schedule)?;
    let lattice = coupling.lattice();
    let nominal = PhaseFunction::from_coupling(&coupling, geom)?;
    let mut perturbed = nominal.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jittered_pairs = 0;
    let mut immune_pairs = 0;
    for (p, q, c) in coupling.pairs() {
        let in_scope = match scope {
            JitterScope::AllPairs => true,
            JitterScope::Separations(ks) => {
                let d2 = lattice.separation_sq(p, q);
                ks.iter().any(|k| k * k == d2)
            }
            JitterScope::ZeroCoefficient => c.is_zero(),
        };
        if !in_scope {
            continue;
        }
        let eta = jitter * rng.random_range(-1.0..=1.0);
        jittered_pairs += 1;
        if c.is_zero() {
            immune_pairs += 1;
            continue;
        }
        let d = lattice.separation(p, q) * (1.0 + eta);
        let theta = PI * c.to_f64().unwrap_or(f64::NAN) * geom.g_unchecked(d)?;
        perturbed.set(p, q, theta);
    }
    let start = initial_state(lattice.len())?;
    let target = cluster_state(lattice)?;
    let nominal_fidelity = fidelity(&evolve_phases(&start, &nominal)?, &target)?;
    let fid = fidelity(&evolve_phases(&start, &perturbed)?, &target)?;
    Ok(JitterSample {
        seed,
        jitter,
        fidelity: fid,
        nominal_fidelity,
        jittered_pairs,
        immune_pairs,
    })
}

/// Runs `perturbed_run` for each seed in parallel; output follows seed order.
pub fn jitter_sweep(
    schedule: &Schedule,
    geom: &MoleculeGeometry,
    jitter: f64,
    seeds: impl IntoParallelIterator<Item = u64>,
    scope: &JitterScope,
) -> Result<Vec<JitterSample>> {
    seeds
        .into_par_iter()
        .map(|seed| perturbed_run(schedule, geom, jitter, seed, scope))
        .collect()
}
