//! Closed-form fidelity against the cluster state.
//!
//! With `Δθ` the phase error relative to the ideal nearest-neighbour `π`,
//! both states share uniform magnitudes and
//! `F = |2^{-N} Σ_z exp(i Σ_{p<q} Δθ_pq z_p z_q)|²`. These routines evaluate
//! that sum directly from the phases, without building a state vector.

use num_complex::Complex64;
use rayon::prelude::*;

use super::PhaseFunction;
use crate::{Error, Result};

/// Largest register for which the full `2^N` sum is attempted.
pub const ENUMERATION_MAX: usize = 30;

// above this size prefer the transfer evaluation when the band allows it
const ENUMERATION_PREFERRED: usize = 22;
const TRANSFER_MAX_BAND: usize = 16;

/// Fidelity from a residual phase function, choosing the cheapest exact
/// evaluation that applies.
pub fn fidelity_analytic(delta: &PhaseFunction) -> Result<f64> {
    let n = delta.num_qubits();
    if n <= ENUMERATION_PREFERRED {
        return fidelity_enumerated(delta);
    }
    if delta.bandwidth() <= TRANSFER_MAX_BAND {
        return fidelity_transfer(delta);
    }
    fidelity_enumerated(delta)
}

/// Sums all `2^N` terms, splitting the register into two halves so every
/// phase is assembled from table lookups in `O(N)`.
pub fn fidelity_enumerated(delta: &PhaseFunction) -> Result<f64> {
    let n = delta.num_qubits();
    if n == 0 || n > ENUMERATION_MAX {
        return Err(Error::QubitCountOutOfRange {
            n,
            max: ENUMERATION_MAX,
        });
    }
    let lo = n / 2;
    let hi = n - lo;
    let low_table = intra_phases(delta, 0, lo);
    let high_table = intra_phases(delta, lo, hi);

    let partial: Vec<Complex64> = (0..1usize << hi)
        .into_par_iter()
        .map(|zh| {
            // coupling of the fixed high half to each low qubit
            let row: Vec<f64> = (0..lo)
                .map(|q| {
                    (0..hi)
                        .filter(|p| zh >> p & 1 == 1)
                        .map(|p| delta.get(lo + p, q))
                        .sum()
                })
                .collect();
            let mut cross = vec![0.0; 1 << lo];
            let mut sum = Complex64::new(0.0, 0.0);
            for zl in 0..1usize << lo {
                if zl > 0 {
                    let t = zl.trailing_zeros() as usize;
                    cross[zl] = cross[zl & (zl - 1)] + row[t];
                }
                sum += Complex64::from_polar(1.0, low_table[zl] + high_table[zh] + cross[zl]);
            }
            sum
        })
        .collect();
    let total: Complex64 = partial.into_iter().sum();
    let amp = total / (1u64 << n) as f64;
    Ok(amp.norm_sqr().clamp(0.0, 1.0))
}

// phase among qubits offset..offset+len for every sub-assignment
fn intra_phases(delta: &PhaseFunction, offset: usize, len: usize) -> Vec<f64> {
    let mut table = vec![0.0; 1 << len];
    for z in 1..1usize << len {
        let top = usize::BITS as usize - 1 - z.leading_zeros() as usize;
        let rest = z ^ (1 << top);
        let link: f64 = (0..top)
            .filter(|q| rest >> q & 1 == 1)
            .map(|q| delta.get(offset + top, offset + q))
            .sum();
        table[z] = table[rest] + link;
    }
    table
}

/// Transfer evaluation along the site order for phases confined to a band
/// `|p − q| ≤ w`. Cost grows as `N·2^w`, so long chains stay cheap.
pub fn fidelity_transfer(delta: &PhaseFunction) -> Result<f64> {
    let n = delta.num_qubits();
    let w = delta.bandwidth();
    if w > TRANSFER_MAX_BAND {
        return Err(Error::DimensionMismatch {
            left: w,
            right: TRANSFER_MAX_BAND,
        });
    }
    if w == 0 {
        return Ok(1.0);
    }
    let states = 1usize << w;
    let keep = states - 1;
    // bit j of a mask is the value of site p-1-j
    let mut weights = vec![Complex64::new(0.0, 0.0); states];
    weights[0] = Complex64::new(1.0, 0.0);
    let mut link = vec![0.0; states];
    for p in 0..n {
        for mask in 1..states {
            let j = mask.trailing_zeros() as usize;
            let contrib = if j < p { delta.get(p, p - 1 - j) } else { 0.0 };
            link[mask] = link[mask & (mask - 1)] + contrib;
        }
        let mut next = vec![Complex64::new(0.0, 0.0); states];
        for (mask, &wgt) in weights.iter().enumerate() {
            if wgt == Complex64::new(0.0, 0.0) {
                continue;
            }
            let half = wgt * 0.5;
            next[(mask << 1) & keep] += half;
            next[((mask << 1) | 1) & keep] += half * Complex64::from_polar(1.0, link[mask]);
        }
        weights = next;
    }
    let amp: Complex64 = weights.iter().sum();
    Ok(amp.norm_sqr().clamp(0.0, 1.0))
}
