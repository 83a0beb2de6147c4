//! Point-charge Coulomb couplings between double-dot molecules.
//!
//! Energies are dimensionless: the prefactor `2e²/(4πε)` is set to 1 and
//! lengths are measured in the same unit as the intra-molecule dot spacing
//! `a`. Only ratios of effective couplings enter the schedule math, so the
//! physical constant never appears.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Rational, Result};

/// Default truncation for infinite separation sums.
pub const DEFAULT_K_MAX: usize = 10_000;

/// Default certified tolerance for truncated sums.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Dot spacing `a` inside a molecule and nearest molecule spacing `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeGeometry {
    a: f64,
    b: f64,
}

impl Default for MoleculeGeometry {
    fn default() -> Self {
        Self { a: 1.0, b: 10.0 }
    }
}

impl MoleculeGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidGeometry { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Interaction energy of two molecules both in (1,1) at distance `d`:
    /// `2/d + 2/√(a² + d²)`.
    pub fn e_zero(&self, d: f64) -> Result<f64> {
        check_distance(d)?;
        Ok(2.0 / d + 2.0 / self.a.hypot(d))
    }

    /// Effective coupling `E₊ = E₁ − E₀ = 2/d − 2/√(a² + d²)`, strictly positive.
    ///
    /// Evaluated as `2a² / (d·r·(r + d))` with `r = √(a² + d²)`, which avoids
    /// the cancellation of the two nearly equal terms at large `d`.
    pub fn e_plus(&self, d: f64) -> Result<f64> {
        check_distance(d)?;
        let r = self.a.hypot(d);
        Ok(2.0 * self.a * self.a / (d * r * (r + d)))
    }

    /// Effective coupling for opposite displaced charge states, `E₋ = −E₊`.
    pub fn e_minus(&self, d: f64) -> Result<f64> {
        self.e_plus(d).map(|e| -e)
    }

    /// Normalized falloff at integer separation `k`: `E₊(a, k·b) / E₊(a, b)`.
    pub fn g(&self, k: usize) -> Result<f64> {
        if k < 1 {
            return Err(Error::SeparationBelowOne(k as f64));
        }
        if k == 1 {
            return Ok(1.0);
        }
        self.g_at(k as f64)
    }

    /// Normalized falloff at a distance expressed as a multiple of `b`
    /// (e.g. `√2` for a grid diagonal).
    pub fn g_at(&self, multiple: f64) -> Result<f64> {
        if multiple.is_nan() || multiple < 1.0 || !multiple.is_finite() {
            return Err(Error::SeparationBelowOne(multiple));
        }
        if multiple == 1.0 {
            return Ok(1.0);
        }
        Ok(self.e_plus(multiple * self.b)? / self.nearest_e_plus())
    }

    /// Falloff at an arbitrary positive distance multiple, without the
    /// lattice-realizability check. Used for jittered distances, which may
    /// fall slightly below one spacing.
    pub(crate) fn g_unchecked(&self, multiple: f64) -> Result<f64> {
        Ok(self.e_plus(multiple * self.b)? / self.nearest_e_plus())
    }

    pub fn coupling_strength(&self, multiple: f64) -> Result<CouplingStrength> {
        let raw = self.e_plus(multiple * self.b)?;
        Ok(CouplingStrength {
            value: self.g_at(multiple)?,
            raw: Some(raw),
        })
    }

    fn nearest_e_plus(&self) -> f64 {
        let r = self.a.hypot(self.b);
        2.0 * self.a * self.a / (self.b * r * (r + self.b))
    }

    /// Constant `C` with `g(k) ≤ C/k³` for every `k ≥ 1`.
    ///
    /// Follows from `1 − (1 + x)^(−1/2) ≤ x/2`, which gives `E₊(a, d) ≤ a²/d³`.
    pub fn cubic_tail_constant(&self) -> f64 {
        self.a * self.a / (self.b.powi(3) * self.nearest_e_plus())
    }

    /// Upper bound on `Σ_{k > k_max} w_max·g(k)` from the integral of `C/k³`.
    pub fn tail_bound(&self, w_max: f64, k_max: usize) -> f64 {
        let k = k_max as f64;
        w_max * self.cubic_tail_constant() / (2.0 * k * k)
    }

    /// `Σ_{k=2}^{k_max} w(k)·g(k)` with the truncation tail certified below `tol`.
    pub fn residual_sum(&self, weights: &PeriodicWeights, k_max: usize, tol: f64) -> Result<f64> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidTolerance(tol));
        }
        let bound = self.tail_bound(weights.max_abs(), k_max.max(1));
        if k_max < 2 || bound > tol {
            return Err(Error::TailBoundExceeded { k_max, bound, tol });
        }
        let values = weights.as_f64();
        // smallest terms first
        let sum = (2..=k_max)
            .rev()
            .map(|k| {
                let w = values[k % values.len()];
                if w == 0.0 {
                    0.0
                } else {
                    w * self.g(k).expect("k >= 2")
                }
            })
            .sum();
        Ok(sum)
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDistance(d))
    }
}

/// Coupling magnitude in units of the nearest-neighbour `E₊(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingStrength {
    pub value: f64,
    pub raw: Option<f64>,
}

/// Separation weights that repeat with a fixed period in `k`.
///
/// `by_residue[r]` is the weight of every separation `k ≡ r (mod period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWeights {
    by_residue: Vec<Rational>,
}

impl PeriodicWeights {
    pub fn new(by_residue: Vec<Rational>) -> Result<Self> {
        if by_residue.is_empty() {
            return Err(Error::EmptyWeights);
        }
        Ok(Self { by_residue })
    }

    pub fn uniform(weight: Rational) -> Self {
        Self {
            by_residue: vec![weight],
        }
    }

    /// Weights `{mn ± 1 → 1, mn → 2}` and zero elsewhere: the residue left
    /// by the window protocols with period `m`.
    pub fn window_residue(m: usize) -> Self {
        assert!(m >= 3, "window residue needs period >= 3");
        let mut by_residue = vec![Rational::zero(); m];
        by_residue[0] = crate::ratio(2, 1);
        by_residue[1] = crate::ratio(1, 1);
        by_residue[m - 1] = crate::ratio(1, 1);
        Self { by_residue }
    }

    pub fn period(&self) -> usize {
        self.by_residue.len()
    }

    pub fn weight(&self, k: usize) -> &Rational {
        &self.by_residue[k % self.by_residue.len()]
    }

    fn max_abs(&self) -> f64 {
        self.by_residue
            .iter()
            .map(|w| w.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    fn as_f64(&self) -> Vec<f64> {
        self.by_residue
            .iter()
            .map(|w| w.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// Molecule arrangement: an open chain or a rectangular grid.
///
/// Sites are numbered `0..len()`, row-major for grids. Distances are in
/// units of the nearest spacing `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Lattice {
    Chain { n: usize },
    Grid { rows: usize, cols: usize },
}

impl Lattice {
    pub fn chain(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLattice(format!(
                "chain needs at least 2 qubits, got {n}"
            )));
        }
        Ok(Lattice::Chain { n })
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidLattice(format!(
                "grid needs at least 2x2 sites, got {rows}x{cols}"
            )));
        }
        Ok(Lattice::Grid { rows, cols })
    }

    pub fn len(&self) -> usize {
        match *self {
            Lattice::Chain { n } => n,
            Lattice::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (row, col) of a site; chains are a single row.
    pub fn coords(&self, site: usize) -> (usize, usize) {
        match *self {
            Lattice::Chain { .. } => (0, site),
            Lattice::Grid { cols, .. } => (site / cols, site % cols),
        }
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        match *self {
            Lattice::Chain { .. } => col,
            Lattice::Grid { cols, .. } => row * cols + col,
        }
    }

    /// Euclidean distance between two sites in units of `b`.
    pub fn separation(&self, p: usize, q: usize) -> f64 {
        let (r1, c1) = self.coords(p);
        let (r2, c2) = self.coords(q);
        let dr = r1.abs_diff(r2) as f64;
        let dc = c1.abs_diff(c2) as f64;
        dr.hypot(dc)
    }

    /// Squared separation as an integer, useful for exact pair classification.
    pub fn separation_sq(&self, p: usize, q: usize) -> usize {
        let (r1, c1) = self.coords(p);
        let (r2, c2) = self.coords(q);
        let dr = r1.abs_diff(r2);
        let dc = c1.abs_diff(c2);
        dr * dr + dc * dc
    }

    pub fn is_nearest(&self, p: usize, q: usize) -> bool {
        self.separation_sq(p, q) == 1
    }

    /// Nearest-neighbour edges `(p, q)` with `p < q`, in lexicographic order.
    pub fn nearest_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut edges = Vec::new();
        for p in 0..n {
            for q in p + 1..n {
                if self.is_nearest(p, q) {
                    edges.push((p, q));
                }
            }
        }
        edges
    }

    /// Short label used in CSV output: `10` or `3x3`.
    pub fn label(&self) -> String {
        match *self {
            Lattice::Chain { n } => n.to_string(),
            Lattice::Grid { rows, cols } => format!("{rows}x{cols}"),
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Lattice::Chain { n } => write!(f, "chain {n}"),
            Lattice::Grid { rows, cols } => write!(f, "grid {rows} {cols}"),
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen reference digits
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Direct-subtraction form, independent of the stable implementation.
    fn naive_e_plus(a: f64, d: f64) -> f64 {
        2.0 / d - 2.0 / (a * a + d * d).sqrt()
    }

    #[test]
    fn e_zero_reference_values() {
        let geom = MoleculeGeometry::new(1.0, 10.0).unwrap();
        assert_relative_eq!(
            geom.e_zero(1.0).unwrap(),
            2.0 + 2.0 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        // 40-digit reference
        assert_relative_eq!(
            geom.e_zero(10.0).unwrap(),
            0.399_007_438_041_997_827_1,
            epsilon = 1e-15
        );
        assert!(geom.e_zero(10.0).unwrap() > geom.e_zero(20.0).unwrap());
    }

    #[test]
    fn e_plus_reference_values() {
        let geom = MoleculeGeometry::default();
        let e10 = geom.e_plus(10.0).unwrap();
        assert_relative_eq!(e10, 9.925_619_580_021_728_669e-4, max_relative = 1e-13);
        assert_relative_eq!(e10, naive_e_plus(1.0, 10.0), max_relative = 1e-12);
        assert_relative_eq!(
            e10 / geom.e_plus(20.0).unwrap(),
            7.955_380_995_502_444,
            max_relative = 1e-12
        );
        assert_relative_eq!(geom.e_minus(10.0).unwrap(), -e10);
    }

    #[test]
    fn e_plus_cubic_asymptote() {
        let geom = MoleculeGeometry::new(1.0, 1.0).unwrap();
        let d: f64 = 1e4;
        assert_relative_eq!(
            d.powi(3) * geom.e_plus(d).unwrap(),
            1.0,
            max_relative = 1e-7
        );
    }

    #[test]
    fn nonpositive_distance_is_rejected() {
        let geom = MoleculeGeometry::default();
        assert_eq!(geom.e_zero(0.0), Err(Error::NonPositiveDistance(0.0)));
        assert_eq!(geom.e_plus(-1.0), Err(Error::NonPositiveDistance(-1.0)));
        assert!(geom.g(0).is_err());
        assert!(geom.g_at(0.5).is_err());
        assert!(MoleculeGeometry::new(0.0, 10.0).is_err());
    }

    #[test]
    fn g_reference_values() {
        let geom = MoleculeGeometry::default();
        assert_eq!(geom.g(1).unwrap(), 1.0);
        assert_relative_eq!(
            geom.g(2).unwrap(),
            0.125_701_082_143_689_6,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            geom.g(3).unwrap(),
            0.037_283_517_760_640_86,
            max_relative = 1e-12
        );
        let oracle = (1.0 / 20.0 - 1.0 / 401f64.sqrt()) / (1.0 / 10.0 - 1.0 / 101f64.sqrt());
        assert_relative_eq!(geom.g(2).unwrap(), oracle, max_relative = 1e-11);
    }

    #[test]
    fn zero_minus_plus_identity() {
        let geom = MoleculeGeometry::new(1.3, 7.0).unwrap();
        for d in [0.5, 1.0, 3.0, 10.0, 77.0] {
            let lhs = geom.e_zero(d).unwrap() - geom.e_plus(d).unwrap();
            assert!((lhs - 4.0 / (1.3f64 * 1.3 + d * d).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_sum_reference_ratios() {
        let geom = MoleculeGeometry::default();
        let r = geom
            .residual_sum(
                &PeriodicWeights::uniform(crate::ratio(1, 1)),
                DEFAULT_K_MAX,
                DEFAULT_TOL,
            )
            .unwrap();
        assert!((r - 0.203_292_564_361_509_2).abs() < 1e-6, "{r}");
        let r4 = geom
            .residual_sum(
                &PeriodicWeights::window_residue(4),
                DEFAULT_K_MAX,
                DEFAULT_TOL,
            )
            .unwrap();
        assert!((r4 - 0.089_984_294_993_970_9).abs() < 1e-6, "{r4}");
        let r8 = geom
            .residual_sum(
                &PeriodicWeights::window_residue(8),
                DEFAULT_K_MAX,
                DEFAULT_TOL,
            )
            .unwrap();
        assert!((r8 - 0.009_857_915_189_101_96).abs() < 1e-6, "{r8}");
    }

    #[test]
    fn residual_sum_rejects_short_truncation() {
        let geom = MoleculeGeometry::default();
        let w = PeriodicWeights::uniform(crate::ratio(1, 1));
        match geom.residual_sum(&w, 10, 1e-9) {
            Err(Error::TailBoundExceeded { k_max: 10, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(geom.residual_sum(&w, 100, 0.0).is_err());
    }

    #[test]
    fn lattice_distances() {
        let grid = Lattice::grid(3, 4).unwrap();
        assert_eq!(grid.len(), 12);
        assert_eq!(grid.coords(5), (1, 1));
        assert!(grid.is_nearest(0, 1));
        assert!(grid.is_nearest(0, 4));
        assert!(!grid.is_nearest(0, 5));
        assert_relative_eq!(grid.separation(0, 5), 2f64.sqrt());
        assert_eq!(grid.nearest_edges().len(), 3 * 3 + 2 * 4);
        let chain = Lattice::chain(5).unwrap();
        assert_eq!(chain.separation(4, 1), 3.0);
        assert_eq!(chain.nearest_edges(), vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(Lattice::chain(1).is_err());
        assert!(Lattice::grid(1, 5).is_err());
    }
}
