//! Exact simulation and schedule tooling for cluster-state preparation in
//! chains and grids of double-dot quantum molecules.
//!
//! Qubits interact through diagonal (Ising-type) Coulomb couplings whose sign
//! is selected by the charge state of each molecule. Because every coupling
//! term commutes with every other, a multi-step charge schedule is fully
//! described by the net, duration-weighted sign of each pair. This crate
//! computes those net coefficients exactly, generates the known cancellation
//! protocols, searches for new ones, and measures the resulting cluster-state
//! fidelity on small registers.
//!
//! Modules:
//! - [`geometry`]: coupling magnitudes and normalized falloff `g(k)`.
//! - [`schedule`]: charge configurations, schedules, net couplings, generators.
//! - [`simulator`]: state vectors, cluster states, fidelity, distance jitter.
//! - [`synthesis`]: exact-rational search for cancelling schedules.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod schedule;
pub mod simulator;
pub mod synthesis;

pub use error::{Error, Result};
pub use geometry::{Lattice, MoleculeGeometry};
pub use schedule::{ChargeConfig, ChargeState, CouplingMatrix, Schedule, Step};
pub use simulator::{PhaseFunction, QuantumState};

/// Exact rational used for durations and net coupling coefficients.
pub type Rational = num_rational::BigRational;

/// Builds a [`Rational`] from a small numerator/denominator pair.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Canonical `p/q` rendering used by the schedule text format.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Signed rendering used in tables: `+1/2`, `-1`, `0`.
pub fn format_signed(r: &Rational) -> String {
    use num_traits::{Signed, Zero};
    if r.is_zero() {
        "0".to_string()
    } else if r.is_positive() {
        format!("+{r}")
    } else {
        format!("{r}")
    }
}
