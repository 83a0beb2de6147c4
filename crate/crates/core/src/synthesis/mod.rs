//! Exact search for charge schedules with a prescribed net-coupling profile.
//!
//! A candidate is a periodic charge string. Each candidate is applied through
//! its whole orbit of cyclic shifts, every shift for the same time, so its
//! contribution to the bulk coefficient at separation `k` is the
//! period-averaged [`sign_vector`] times its total time and does not depend on
//! position. Durations are then the solution of a small exact linear program:
//! hit the nearest-neighbour target, zero every cancelled separation, and
//! minimize total time.

mod lp;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{Lattice, MoleculeGeometry};
use crate::schedule::{
    net_coupling, pair_sign, residual_ratio, ChargeConfig, ChargeState, Schedule, Step,
};
use crate::{format_rational, Error, Rational, Result};

use lp::LpOutcome;

/// Largest period accepted for exhaustive enumeration over {Up, Down}.
pub const MAX_ENUM_PERIOD: usize = 12;
/// Largest period accepted when Neutral is admitted.
pub const MAX_ENUM_PERIOD_NEUTRAL: usize = 8;

// restricted programs tried while looking for the fewest-pattern optimum
const SUPPORT_SEARCH_BUDGET: usize = 50_000;

/// One period of a charge string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern(Vec<ChargeState>);

impl Pattern {
    pub fn new(states: Vec<ChargeState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidFamily("empty pattern".into()));
        }
        Ok(Self(states))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let cfg = ChargeConfig::parse(s)
            .ok_or_else(|| Error::InvalidFamily(format!("pattern {s:?} must use N, U, D")))?;
        Self::new(cfg.states().to_vec())
    }

    pub fn all_up(period: usize) -> Self {
        Self(vec![ChargeState::Up; period])
    }

    pub fn period(&self) -> usize {
        self.0.len()
    }

    pub fn states(&self) -> &[ChargeState] {
        &self.0
    }

    pub fn at(&self, site: usize) -> ChargeState {
        self.0[site % self.0.len()]
    }

    /// The pattern moved `by` sites to the left.
    pub fn shifted_left(&self, by: usize) -> Self {
        let mut v = self.0.clone();
        v.rotate_left(by % self.0.len());
        Self(v)
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| s.flipped()).collect())
    }

    /// Distinct left shifts in the order they are first reached.
    pub fn orbit(&self) -> Vec<Pattern> {
        let mut out: Vec<Pattern> = Vec::new();
        for s in 0..self.period() {
            let p = self.shifted_left(s);
            if out.contains(&p) {
                break;
            }
            out.push(p);
        }
        out
    }

    /// Configuration of a chain of `n` sites, with site `anchor` at pattern
    /// position 0.
    pub fn config(&self, n: usize, anchor: usize) -> ChargeConfig {
        let period = self.period();
        ChargeConfig::from_fn(n, |site| self.at(site + period - anchor % period))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

/// Period average of `pair_sign(site j, site j + k)`; in `[−1, 1]`.
pub fn sign_vector(pattern: &Pattern, k: usize) -> Rational {
    let p = pattern.period();
    let total: i64 = (0..p)
        .map(|j| pair_sign(pattern.at(j), pattern.at(j + k)) as i64)
        .sum();
    crate::ratio(total, p as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Two-site Up window shifted left one site per member, plus all-Up.
    Window,
    /// Every charge string of the period, one representative per orbit.
    #[serde(rename = "enum")]
    Enumerated,
}

/// Candidate patterns for the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternFamily {
    period: usize,
    kind: FamilyKind,
    members: Vec<Pattern>,
}

impl PatternFamily {
    /// `period` shifted windows then the all-Up pattern: member `s` (1-based)
    /// has Up at positions `{1−s, 2−s} mod period`.
    pub fn window(period: usize) -> Result<Self> {
        if period < 2 {
            return Err(Error::InvalidFamily(format!(
                "period must be >= 2, got {period}"
            )));
        }
        let p = period as i64;
        let mut members: Vec<Pattern> = (1..=p)
            .map(|s| {
                let lo = (1 - s).rem_euclid(p) as usize;
                let hi = (2 - s).rem_euclid(p) as usize;
                Pattern(
                    (0..period)
                        .map(|r| {
                            if r == lo || r == hi {
                                ChargeState::Up
                            } else {
                                ChargeState::Down
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        members.push(Pattern::all_up(period));
        Ok(Self {
            period,
            kind: FamilyKind::Window,
            members,
        })
    }

    /// All strings of length `period` over {Up, Down} (and Neutral when
    /// `allow_neutral`), keeping the lexicographically smallest member of each
    /// class under cyclic shift and global Up↔Down swap. The all-Neutral
    /// string is dropped since it couples nothing.
    pub fn enumerated(period: usize, allow_neutral: bool) -> Result<Self> {
        let cap = if allow_neutral {
            MAX_ENUM_PERIOD_NEUTRAL
        } else {
            MAX_ENUM_PERIOD
        };
        if !(2..=cap).contains(&period) {
            return Err(Error::InvalidFamily(format!(
                "enumerated period must be in 2..={cap}, got {period}"
            )));
        }
        let alphabet: &[ChargeState] = if allow_neutral {
            &[ChargeState::Up, ChargeState::Down, ChargeState::Neutral]
        } else {
            &[ChargeState::Up, ChargeState::Down]
        };
        let base = alphabet.len();
        let mut members = Vec::new();
        for code in 0..base.pow(period as u32) {
            let mut c = code;
            // most significant digit first
            let mut states: Vec<ChargeState> = (0..period)
                .map(|_| {
                    let s = alphabet[c % base];
                    c /= base;
                    s
                })
                .collect();
            states.reverse();
            if states.iter().all(|&s| s == ChargeState::Neutral) {
                continue;
            }
            let pat = Pattern(states);
            let canonical = pat
                .orbit()
                .into_iter()
                .chain(pat.flipped().orbit())
                .map(|p| rank_key(&p))
                .min()
                .expect("nonempty orbit");
            if canonical == rank_key(&pat) {
                members.push(pat);
            }
        }
        Ok(Self {
            period,
            kind: FamilyKind::Enumerated,
            members,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn members(&self) -> &[Pattern] {
        &self.members
    }

    /// Members grouped into shift orbits, in order of first appearance.
    /// Each orbit keeps the member order of the family where members are
    /// shifts of one another, and the natural left-shift order otherwise.
    fn orbits(&self) -> Vec<Vec<Pattern>> {
        let mut orbits: Vec<Vec<Pattern>> = Vec::new();
        for m in &self.members {
            if let Some(o) = orbits.iter_mut().find(|o| o[0].orbit().contains(m)) {
                if !o.contains(m) {
                    o.push(m.clone());
                }
            } else {
                orbits.push(vec![m.clone()]);
            }
        }
        for o in &mut orbits {
            for p in o[0].orbit() {
                if !o.contains(&p) {
                    o.push(p);
                }
            }
        }
        orbits
    }
}

// U < D < N, matching the enumeration order
fn rank_key(p: &Pattern) -> Vec<u8> {
    p.0.iter()
        .map(|s| match s {
            ChargeState::Up => 0,
            ChargeState::Down => 1,
            ChargeState::Neutral => 2,
        })
        .collect()
}

/// Required bulk coefficients: `nearest` at `k = 1`, zero on `cancel_set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetProfile {
    nearest: Rational,
    cancel_set: BTreeSet<usize>,
    free_set: BTreeSet<usize>,
}

impl TargetProfile {
    pub fn new(nearest: Rational, cancel_set: BTreeSet<usize>) -> Result<Self> {
        if cancel_set.contains(&1) {
            return Err(Error::InvalidTarget(
                "separation 1 cannot be cancelled".into(),
            ));
        }
        if cancel_set.contains(&0) {
            return Err(Error::InvalidTarget("separations start at 1".into()));
        }
        Ok(Self {
            nearest,
            cancel_set,
            free_set: BTreeSet::new(),
        })
    }

    /// Separations explicitly left unconstrained (informational).
    pub fn with_free(mut self, free_set: BTreeSet<usize>) -> Result<Self> {
        if let Some(k) = free_set.intersection(&self.cancel_set).next() {
            return Err(Error::InvalidTarget(format!(
                "separation {k} is both free and cancelled"
            )));
        }
        self.free_set = free_set;
        Ok(self)
    }

    pub fn nearest(&self) -> &Rational {
        &self.nearest
    }

    pub fn cancel_set(&self) -> &BTreeSet<usize> {
        &self.cancel_set
    }

    pub fn free_set(&self) -> &BTreeSet<usize> {
        &self.free_set
    }

    fn constrained(&self) -> Vec<(usize, Rational)> {
        std::iter::once((1, self.nearest.clone()))
            .chain(self.cancel_set.iter().map(|&k| (k, Rational::zero())))
            .collect()
    }
}

/// Durations found for a family, with the exact bulk coefficients they give.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub period: usize,
    /// Total time of each used orbit, keyed by the orbit's first pattern.
    pub orbit_durations: Vec<(Pattern, Rational)>,
    /// Expanded schedule, one period of each step.
    pub steps: Vec<(Pattern, Rational)>,
    pub total_time: Rational,
    /// Bulk coefficient per separation `k = 1..=K`.
    pub certificate: BTreeMap<usize, Rational>,
}

impl SynthesisResult {
    /// Concrete schedule on a chain with pattern position 0 at `anchor`.
    pub fn schedule(&self, lattice: Lattice, anchor: usize) -> Result<Schedule> {
        let Lattice::Chain { n } = lattice else {
            return Err(Error::NotAChain);
        };
        let steps = self
            .steps
            .iter()
            .map(|(p, d)| Step::new(p.config(n, anchor), d.clone()))
            .collect::<Result<Vec<_>>>()?;
        Schedule::from_steps(lattice, steps)
    }

    /// `k,coefficient` lines.
    pub fn certificate_table(&self) -> String {
        let mut out = String::from("k,coefficient\n");
        for (k, c) in &self.certificate {
            out.push_str(&format!("{k},{}\n", format_rational(c)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisOutcome {
    Feasible(SynthesisResult),
    /// No nonnegative durations over the family meet the target.
    Infeasible {
        reason: String,
    },
}

impl SynthesisOutcome {
    pub fn feasible(self) -> Option<SynthesisResult> {
        match self {
            SynthesisOutcome::Feasible(r) => Some(r),
            SynthesisOutcome::Infeasible { .. } => None,
        }
    }
}

/// Minimum-time nonnegative durations over `family` meeting `target`.
///
/// Ties among minimum-time solutions go to the fewest orbits, then the
/// fewest expanded steps, then the lexicographically first orbit indices in
/// family order. The tie search is exhaustive within a fixed budget of
/// restricted programs; past it the simplex vertex is returned as is.
pub fn solve_durations(family: &PatternFamily, target: &TargetProfile) -> Result<SynthesisOutcome> {
    if family.members.is_empty() {
        return Err(Error::InvalidFamily("family has no members".into()));
    }
    let orbits = family.orbits();
    let rows = target.constrained();
    let matrix: Vec<Vec<Rational>> = rows
        .iter()
        .map(|(k, _)| orbits.iter().map(|o| sign_vector(&o[0], *k)).collect())
        .collect();
    let rhs: Vec<Rational> = rows.iter().map(|(_, v)| v.clone()).collect();
    let ones = vec![Rational::one(); orbits.len()];

    let (vertex, best) = match lp::minimize(&matrix, &rhs, &ones) {
        LpOutcome::Optimal { x, value } => (x, value),
        LpOutcome::Infeasible => {
            let ks: Vec<String> = rows.iter().map(|(k, _)| k.to_string()).collect();
            return Ok(SynthesisOutcome::Infeasible {
                reason: format!(
                    "no nonnegative durations over the {} family of period {} satisfy separations [{}]",
                    match family.kind {
                        FamilyKind::Window => "window",
                        FamilyKind::Enumerated => "enumerated",
                    },
                    family.period,
                    ks.join(", ")
                ),
            });
        }
        LpOutcome::Unbounded => unreachable!("nonnegative durations with unit cost are bounded"),
    };

    let durations = fewest_support(&matrix, &rhs, &orbits, &best).unwrap_or(vertex);
    Ok(SynthesisOutcome::Feasible(assemble(
        family, &orbits, &durations, target,
    )))
}

fn fewest_support(
    matrix: &[Vec<Rational>],
    rhs: &[Rational],
    orbits: &[Vec<Pattern>],
    best: &Rational,
) -> Option<Vec<Rational>> {
    let cols = orbits.len();
    let mut spent = 0usize;
    for size in 1..=rhs.len().min(cols) {
        let combos = combinations(cols, size, SUPPORT_SEARCH_BUDGET - spent)?;
        spent += combos.len();
        let hit = combos
            .par_iter()
            .filter_map(|support| {
                let sub: Vec<Vec<Rational>> = matrix
                    .iter()
                    .map(|row| support.iter().map(|&j| row[j].clone()).collect())
                    .collect();
                match lp::minimize(&sub, rhs, &vec![Rational::one(); size]) {
                    LpOutcome::Optimal { x, value } if value == *best => {
                        let steps: usize = support
                            .iter()
                            .zip(&x)
                            .filter(|(_, t)| t.is_positive())
                            .map(|(&j, _)| orbits[j].len())
                            .sum();
                        Some((steps, support.clone(), x))
                    }
                    _ => None,
                }
            })
            .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        if let Some((_, support, x)) = hit {
            let mut full = vec![Rational::zero(); cols];
            for (j, v) in support.into_iter().zip(x) {
                full[j] = v;
            }
            return Some(full);
        }
    }
    None
}

// k-subsets of 0..n in lexicographic order; None when more than `limit`
fn combinations(n: usize, k: usize, limit: usize) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if out.len() >= limit {
            return None;
        }
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return Some(out);
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn assemble(
    family: &PatternFamily,
    orbits: &[Vec<Pattern>],
    durations: &[Rational],
    target: &TargetProfile,
) -> SynthesisResult {
    let mut orbit_durations = Vec::new();
    let mut steps = Vec::new();
    for (orbit, tau) in orbits.iter().zip(durations) {
        if tau.is_zero() {
            continue;
        }
        orbit_durations.push((orbit[0].clone(), tau.clone()));
        let share = tau / Rational::from_integer((orbit.len() as i64).into());
        steps.extend(orbit.iter().map(|p| (p.clone(), share.clone())));
    }
    let total_time = durations.iter().fold(Rational::zero(), |a, t| a + t);
    let k_max = target
        .cancel_set
        .iter()
        .copied()
        .max()
        .unwrap_or(1)
        .max(2 * family.period);
    let certificate = (1..=k_max)
        .map(|k| {
            let c = orbits
                .iter()
                .zip(durations)
                .fold(Rational::zero(), |acc, (o, t)| {
                    acc + t * sign_vector(&o[0], k)
                });
            (k, c)
        })
        .collect();
    SynthesisResult {
        period: family.period,
        orbit_durations,
        steps,
        total_time,
        certificate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checked_pairs: usize,
    pub total_time: String,
    pub residual_ratio: f64,
}

/// Recomputes the net coupling of `result` on a concrete chain and checks
/// every pair up to the certificate's largest separation. Mismatches are
/// reported at the smallest failing `k`.
pub fn verify(
    result: &SynthesisResult,
    lattice: Lattice,
    geom: &MoleculeGeometry,
    k_max: usize,
    tol: f64,
) -> Result<VerifyReport> {
    let Lattice::Chain { n } = lattice else {
        return Err(Error::NotAChain);
    };
    if n < 4 * result.period {
        return Err(Error::InvalidLattice(format!(
            "verification needs at least {} sites for period {}, got {n}",
            4 * result.period,
            result.period
        )));
    }
    let schedule = result.schedule(lattice, 0)?;
    let coupling = net_coupling(&schedule)?;
    let mut checked_pairs = 0;
    for (&k, expected) in &result.certificate {
        for p in 0..n.saturating_sub(k) {
            let actual = coupling.get(p, p + k);
            if actual != *expected {
                return Err(Error::VerificationFailed {
                    k,
                    expected: format_rational(expected),
                    actual: format_rational(&actual),
                });
            }
            checked_pairs += 1;
        }
    }
    Ok(VerifyReport {
        checked_pairs,
        total_time: format_rational(&result.total_time),
        residual_ratio: residual_ratio(&schedule, geom, k_max, tol)?,
    })
}

/// JSON request: `{"nearest": "1", "cancel": [2,3,4],
/// "family": {"kind": "window"|"enum", "period": m, "neutral": false}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDocument {
    #[serde(default = "default_nearest")]
    pub nearest: String,
    #[serde(default)]
    pub cancel: Vec<usize>,
    #[serde(default)]
    pub free: Vec<usize>,
    pub family: FamilyDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDocument {
    pub kind: FamilyKind,
    pub period: usize,
    #[serde(default)]
    pub neutral: bool,
}

fn default_nearest() -> String {
    "1".into()
}

impl TargetDocument {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidTarget(e.to_string()))
    }

    pub fn build(&self) -> Result<(PatternFamily, TargetProfile)> {
        let nearest: Rational = self
            .nearest
            .parse()
            .map_err(|e| Error::InvalidTarget(format!("nearest {:?}: {e}", self.nearest)))?;
        let target = TargetProfile::new(nearest, self.cancel.iter().copied().collect())?
            .with_free(self.free.iter().copied().collect())?;
        let family = match self.family.kind {
            FamilyKind::Window => PatternFamily::window(self.family.period)?,
            FamilyKind::Enumerated => {
                PatternFamily::enumerated(self.family.period, self.family.neutral)?
            }
        };
        Ok((family, target))
    }
}
