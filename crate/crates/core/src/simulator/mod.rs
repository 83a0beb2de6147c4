//! Exact state-vector evolution under commuting diagonal couplings.
//!
//! Basis index bit `p` is 1 when qubit `p` is in `|S⟩` and 0 for `|T⟩`.
//! Only `|SS⟩` components of a pair pick up the effective coupling phase, so
//! a coupling matrix acts as `ψ(z) ← ψ(z)·exp(i Σ_{p<q} θ_pq z_p z_q)`.
//! Global phases from the (1,1) baseline energy are dropped.

mod analytic;
mod jitter;
mod phase;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{Lattice, MoleculeGeometry};
use crate::schedule::CouplingMatrix;
use crate::{Error, Result};

pub use analytic::{fidelity_analytic, fidelity_enumerated, fidelity_transfer, ENUMERATION_MAX};
pub use jitter::{jitter_sweep, perturbed_run, JitterSample, JitterScope};
pub use phase::{residual_phases, PhaseFunction};

/// Largest register held as a dense vector.
pub const MAX_QUBITS: usize = 20;

// chunk size for deterministic parallel reductions
const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        chunked_sum(&self.amps, |a| Complex64::new(a.norm_sqr(), 0.0)).re
    }

    /// Largest componentwise distance to another state of the same size.
    pub fn max_abs_diff(&self, other: &QuantumState) -> Result<f64> {
        check_dims(self.amps.len(), other.amps.len())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `index,re,im` lines for debugging.
    pub fn to_table(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, a) in self.amps.iter().enumerate() {
            out.push_str(&format!("{i},{:.17e},{:.17e}\n", a.re, a.im));
        }
        out
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCountOutOfRange { n, max: MAX_QUBITS })
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// Order-stable parallel sum: fixed chunks reduced in index order.
fn chunked_sum<T: Sync>(items: &[T], f: impl Fn(&T) -> Complex64 + Sync) -> Complex64 {
    let partial: Vec<Complex64> = items
        .par_chunks(CHUNK)
        .map(|chunk| chunk.iter().map(&f).sum())
        .collect();
    partial.into_iter().sum()
}

/// Every qubit in `(|S⟩ + |T⟩)/√2`.
pub fn initial_state(n: usize) -> Result<QuantumState> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    Ok(QuantumState {
        n,
        amps: vec![amp; dim],
    })
}

/// Applies the diagonal phase `exp(i Σ_{p<q} θ_pq z_p z_q)`.
pub fn evolve_phases(state: &QuantumState, phases: &PhaseFunction) -> Result<QuantumState> {
    check_dims(state.n, phases.num_qubits())?;
    let n = state.n;
    let mut amps = state.amps.clone();
    amps.par_iter_mut().enumerate().for_each(|(z, amp)| {
        let mut angle = 0.0;
        for p in 0..n {
            if z >> p & 1 == 0 {
                continue;
            }
            for q in p + 1..n {
                if z >> q & 1 == 1 {
                    angle += phases.get(p, q);
                }
            }
        }
        if angle != 0.0 {
            *amp *= Complex64::from_polar(1.0, angle);
        }
    });
    Ok(QuantumState { n, amps })
}

/// Evolves under the net coupling `c_pq`, i.e. phases `π·c_pq·g(d_pq/b)`.
pub fn evolve(
    state: &QuantumState,
    coupling: &CouplingMatrix,
    geom: &MoleculeGeometry,
) -> Result<QuantumState> {
    check_dims(state.n, coupling.lattice().len())?;
    evolve_phases(state, &PhaseFunction::from_coupling(coupling, geom)?)
}

/// Cluster state: `2^{-N/2}·(−1)^{Σ_edges z_p z_q}`.
pub fn cluster_state(lattice: Lattice) -> Result<QuantumState> {
    let n = lattice.len();
    check_qubits(n)?;
    let masks: Vec<usize> = lattice
        .nearest_edges()
        .into_iter()
        .map(|(p, q)| (1 << p) | (1 << q))
        .collect();
    let dim = 1usize << n;
    let norm = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .into_par_iter()
        .map(|z| {
            let odd = masks.iter().filter(|&&m| z & m == m).count() % 2 == 1;
            Complex64::new(if odd { -norm } else { norm }, 0.0)
        })
        .collect();
    Ok(QuantumState { n, amps })
}

/// `|⟨phi|psi⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(psi: &QuantumState, phi: &QuantumState) -> Result<f64> {
    check_dims(psi.amps.len(), phi.amps.len())?;
    let partial: Vec<Complex64> = psi
        .amps
        .par_chunks(CHUNK)
        .zip(phi.amps.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| y.conj() * x).sum())
        .collect();
    let overlap: Complex64 = partial.into_iter().sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// Fidelity of the state reached by a schedule's net coupling against the
/// ideal cluster state on the same lattice.
pub fn schedule_fidelity(coupling: &CouplingMatrix, geom: &MoleculeGeometry) -> Result<f64> {
    let lattice = coupling.lattice();
    let evolved = evolve(&initial_state(lattice.len())?, coupling, geom)?;
    fidelity(&evolved, &cluster_state(lattice)?)
}
