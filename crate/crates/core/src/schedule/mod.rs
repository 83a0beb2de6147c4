//! Charge-configuration schedules and their exact net Ising couplings.
//!
//! Every step holds each molecule in one charge state for a fixed duration
//! (units of `t₀`). A pair interacts only when both molecules are displaced:
//! same displacement gives `+E₊`, opposite displacement gives `E₋ = −E₊`, and
//! a molecule left in (1,1) decouples. All pair Hamiltonians are diagonal and
//! commute, so the whole schedule reduces to one rational coefficient per pair.

mod format;
mod generators;

use std::fmt;
use std::ops::{Add, Neg};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Lattice, MoleculeGeometry, PeriodicWeights};
use crate::{Error, Rational, Result};

pub use format::ScheduleDocument;
pub use generators::{gen_2d_three_step, gen_m_step, gen_one_step, gen_three_step};

/// Charge state of one double-dot molecule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChargeState {
    /// (1,1): no effective coupling to anything.
    Neutral,
    /// (0,2)
    Up,
    /// (2,0)
    Down,
}

impl ChargeState {
    pub fn as_char(self) -> char {
        match self {
            ChargeState::Neutral => 'N',
            ChargeState::Up => 'U',
            ChargeState::Down => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'N' => Some(ChargeState::Neutral),
            'U' => Some(ChargeState::Up),
            'D' => Some(ChargeState::Down),
            _ => None,
        }
    }

    /// Swaps Up and Down; Neutral is unchanged.
    pub fn flipped(self) -> Self {
        match self {
            ChargeState::Up => ChargeState::Down,
            ChargeState::Down => ChargeState::Up,
            ChargeState::Neutral => ChargeState::Neutral,
        }
    }
}

/// Sign of the effective coupling between two molecules.
pub fn pair_sign(s1: ChargeState, s2: ChargeState) -> i8 {
    use ChargeState::*;
    match (s1, s2) {
        (Neutral, _) | (_, Neutral) => 0,
        (Up, Up) | (Down, Down) => 1,
        (Up, Down) | (Down, Up) => -1,
    }
}

/// Charge state of every site of a lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChargeConfig {
    states: Vec<ChargeState>,
}

impl ChargeConfig {
    pub fn new(states: Vec<ChargeState>) -> Self {
        Self { states }
    }

    pub fn uniform(len: usize, state: ChargeState) -> Self {
        Self {
            states: vec![state; len],
        }
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> ChargeState) -> Self {
        Self {
            states: (0..len).map(f).collect(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(ChargeState::from_char)
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ChargeState] {
        &self.states
    }

    pub fn get(&self, site: usize) -> ChargeState {
        self.states[site]
    }

    pub fn flipped(&self) -> Self {
        Self {
            states: self.states.iter().map(|s| s.flipped()).collect(),
        }
    }

    fn is_periodic(&self, period: usize) -> bool {
        self.states
            .iter()
            .zip(self.states.iter().skip(period))
            .all(|(a, b)| a == b)
    }
}

impl fmt::Display for ChargeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// One schedule step: hold `config` for `duration` (units of `t₀`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    config: ChargeConfig,
    duration: Rational,
}

impl Step {
    pub fn new(config: ChargeConfig, duration: Rational) -> Result<Self> {
        if duration.is_negative() {
            return Err(Error::NegativeDuration(duration.to_string()));
        }
        Ok(Self { config, duration })
    }

    pub fn config(&self) -> &ChargeConfig {
        &self.config
    }

    pub fn duration(&self) -> &Rational {
        &self.duration
    }

    /// Duration-weighted sign for one pair in this step alone.
    pub fn coefficient(&self, p: usize, q: usize) -> Rational {
        match pair_sign(self.config.get(p), self.config.get(q)) {
            0 => Rational::zero(),
            1 => self.duration.clone(),
            _ => -self.duration.clone(),
        }
    }
}

/// Ordered list of steps over one lattice.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    lattice: Lattice,
    steps: Vec<Step>,
}

impl Schedule {
    pub fn new(lattice: Lattice) -> Self {
        Self {
            lattice,
            steps: Vec::new(),
        }
    }

    pub fn from_steps(lattice: Lattice, steps: Vec<Step>) -> Result<Self> {
        let mut schedule = Self::new(lattice);
        for step in steps {
            schedule.push(step)?;
        }
        Ok(schedule)
    }

    pub fn push(&mut self, step: Step) -> Result<()> {
        if step.config.len() != self.lattice.len() {
            return Err(Error::LatticeMismatch {
                expected: self.lattice.len(),
                found: step.config.len(),
            });
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_time(&self) -> Rational {
        self.steps
            .iter()
            .fold(Rational::zero(), |acc, s| acc + &s.duration)
    }

    /// Same steps in a different order. `order` must be a permutation of
    /// `0..len()`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.steps.len(), "permutation length");
        Self {
            lattice: self.lattice,
            steps: order.iter().map(|&i| self.steps[i].clone()).collect(),
        }
    }

    /// Coupling produced by step `index` alone.
    pub fn step_coupling(&self, index: usize) -> CouplingMatrix {
        coupling_of(self.lattice, std::slice::from_ref(&self.steps[index]))
    }

    /// Smallest spatial period shared by every step, searched up to half the
    /// chain length.
    pub fn period(&self) -> Result<usize> {
        let Lattice::Chain { n } = self.lattice else {
            return Err(Error::NotAChain);
        };
        (1..=n / 2)
            .find(|&p| self.steps.iter().all(|s| s.config.is_periodic(p)))
            .ok_or(Error::NotPeriodic)
    }

    /// Net coefficient per separation for a periodic chain schedule, extended
    /// periodically to any `k`.
    pub fn bulk_profile(&self) -> Result<BulkProfile> {
        if self.steps.is_empty() {
            return Err(Error::EmptySchedule);
        }
        let period = self.period()?;
        let mut coeffs = Vec::with_capacity(period);
        for k in 1..=period {
            let at_residue = |r: usize| -> Rational {
                let q = (r + k) % period;
                self.steps
                    .iter()
                    .fold(Rational::zero(), |acc, s| acc + s.coefficient(r, q))
            };
            let c = at_residue(0);
            if (1..period).any(|r| at_residue(r) != c) {
                return Err(Error::NotTranslationInvariant(k));
            }
            coeffs.push(c);
        }
        // coeffs[k-1] holds separation k; rotate so index is k mod period
        coeffs.rotate_right(1);
        Ok(BulkProfile { coeffs })
    }
}

/// Periodic net coefficient per separation `k` of a bulk chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BulkProfile {
    coeffs: Vec<Rational>,
}

impl BulkProfile {
    pub fn period(&self) -> usize {
        self.coeffs.len()
    }

    pub fn at(&self, k: usize) -> &Rational {
        &self.coeffs[k % self.coeffs.len()]
    }

    /// `c(1), …, c(k_max)`.
    pub fn row(&self, k_max: usize) -> Vec<Rational> {
        (1..=k_max).map(|k| self.at(k).clone()).collect()
    }
}

/// Symmetric map from site pairs to exact net coefficients (units `t₀`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMatrix {
    lattice: Lattice,
    // upper triangle, row-major, p < q
    coeff: Vec<Rational>,
}

impl CouplingMatrix {
    pub fn zeros(lattice: Lattice) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            coeff: vec![Rational::zero(); n * (n - 1) / 2],
        }
    }

    /// Coefficient 1 on every nearest-neighbour pair and 0 elsewhere: a
    /// controlled-Z across every lattice edge.
    pub fn ideal(lattice: Lattice) -> Self {
        let mut m = Self::zeros(lattice);
        for (p, q) in lattice.nearest_edges() {
            m.set(p, q, crate::ratio(1, 1));
        }
        m
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    fn index(&self, p: usize, q: usize) -> usize {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        let n = self.lattice.len();
        p * (2 * n - p - 1) / 2 + (q - p - 1)
    }

    pub fn get(&self, p: usize, q: usize) -> Rational {
        if p == q {
            Rational::zero()
        } else {
            self.coeff[self.index(p, q)].clone()
        }
    }

    pub fn set(&mut self, p: usize, q: usize, value: Rational) {
        assert_ne!(p, q, "diagonal coefficients are fixed at zero");
        let i = self.index(p, q);
        self.coeff[i] = value;
    }

    /// `(p, q, c_pq)` for every `p < q`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        let n = self.lattice.len();
        (0..n)
            .flat_map(move |p| (p + 1..n).map(move |q| (p, q)))
            .zip(self.coeff.iter())
            .map(|((p, q), c)| (p, q, c))
    }

    /// Real phase `π·c_pq·g(d_pq / b)` for one pair.
    pub fn phase(&self, p: usize, q: usize, geom: &MoleculeGeometry) -> Result<f64> {
        use num_traits::ToPrimitive;
        let c = self.get(p, q);
        if c.is_zero() {
            return Ok(0.0);
        }
        let g = geom.g_at(self.lattice.separation(p, q))?;
        Ok(std::f64::consts::PI * c.to_f64().unwrap_or(f64::NAN) * g)
    }
}

impl Neg for CouplingMatrix {
    type Output = CouplingMatrix;

    fn neg(mut self) -> CouplingMatrix {
        for c in &mut self.coeff {
            *c = -c.clone();
        }
        self
    }
}

impl Add<&CouplingMatrix> for CouplingMatrix {
    type Output = CouplingMatrix;

    fn add(mut self, rhs: &CouplingMatrix) -> CouplingMatrix {
        assert_eq!(
            self.lattice, rhs.lattice,
            "adding couplings on different lattices"
        );
        for (a, b) in self.coeff.iter_mut().zip(&rhs.coeff) {
            *a += b;
        }
        self
    }
}

fn coupling_of(lattice: Lattice, steps: &[Step]) -> CouplingMatrix {
    let n = lattice.len();
    let rows: Vec<Vec<Rational>> = (0..n)
        .into_par_iter()
        .map(|p| {
            (p + 1..n)
                .map(|q| {
                    steps
                        .iter()
                        .fold(Rational::zero(), |acc, s| acc + s.coefficient(p, q))
                })
                .collect()
        })
        .collect();
    CouplingMatrix {
        lattice,
        coeff: rows.into_iter().flatten().collect(),
    }
}

/// Exact net coupling `c_pq = Σ_steps sign·duration` of a schedule.
pub fn net_coupling(schedule: &Schedule) -> Result<CouplingMatrix> {
    if schedule.steps.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if let Some(bad) = schedule
        .steps
        .iter()
        .find(|s| s.config.len() != schedule.lattice.len())
    {
        return Err(Error::LatticeMismatch {
            expected: schedule.lattice.len(),
            found: bad.config.len(),
        });
    }
    Ok(coupling_of(schedule.lattice, &schedule.steps))
}

/// Residual non-nearest coupling relative to the nearest-neighbour coupling:
/// `Σ_{k≥2} |c(k)|·g(k) / |c(1)|`, using the periodic bulk coefficients of a
/// chain schedule.
pub fn residual_ratio(
    schedule: &Schedule,
    geom: &MoleculeGeometry,
    k_max: usize,
    tol: f64,
) -> Result<f64> {
    let profile = schedule.bulk_profile()?;
    let nearest = profile.at(1).abs();
    if nearest.is_zero() {
        return Err(Error::ZeroNearestCoupling);
    }
    let weights = PeriodicWeights::new(
        (0..profile.period())
            .map(|r| profile.at(r).abs() / &nearest)
            .collect(),
    )?;
    geom.residual_sum(&weights, k_max, tol)
}
