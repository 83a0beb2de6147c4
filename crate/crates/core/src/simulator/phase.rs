use std::f64::consts::PI;

use crate::geometry::MoleculeGeometry;
use crate::schedule::CouplingMatrix;
use crate::Result;

/// Real pair phases `θ_pq` (radians) of a diagonal two-body evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunction {
    n: usize,
    // upper triangle, row-major, p < q
    theta: Vec<f64>,
}

impl PhaseFunction {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            theta: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    /// `θ_pq = π·c_pq·g(d_pq / b)`.
    pub fn from_coupling(coupling: &CouplingMatrix, geom: &MoleculeGeometry) -> Result<Self> {
        let n = coupling.lattice().len();
        let mut out = Self::zeros(n);
        for (p, q, _) in coupling.pairs() {
            out.set(p, q, coupling.phase(p, q, geom)?);
        }
        Ok(out)
    }

    /// Phases of the target evolution: `π` on every nearest-neighbour pair.
    pub fn ideal(lattice: crate::Lattice) -> Self {
        let mut out = Self::zeros(lattice.len());
        for (p, q) in lattice.nearest_edges() {
            out.set(p, q, PI);
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn index(&self, p: usize, q: usize) -> usize {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        p * (2 * self.n - p - 1) / 2 + (q - p - 1)
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        if p == q {
            0.0
        } else {
            self.theta[self.index(p, q)]
        }
    }

    pub fn set(&mut self, p: usize, q: usize, value: f64) {
        assert_ne!(p, q, "diagonal phases are fixed at zero");
        let i = self.index(p, q);
        self.theta[i] = value;
    }

    /// Elementwise difference `self − other`.
    pub fn minus(&self, other: &PhaseFunction) -> PhaseFunction {
        assert_eq!(self.n, other.n, "phase functions of different sizes");
        PhaseFunction {
            n: self.n,
            theta: self
                .theta
                .iter()
                .zip(&other.theta)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Largest `|p − q|` carrying a nonzero phase.
    pub fn bandwidth(&self) -> usize {
        let mut w = 0;
        for p in 0..self.n {
            for q in p + 1..self.n {
                if self.get(p, q) != 0.0 {
                    w = w.max(q - p);
                }
            }
        }
        w
    }
}

/// Phases of `coupling` minus the ideal nearest-neighbour `π`.
pub fn residual_phases(
    coupling: &CouplingMatrix,
    geom: &MoleculeGeometry,
) -> Result<PhaseFunction> {
    Ok(PhaseFunction::from_coupling(coupling, geom)?
        .minus(&PhaseFunction::ideal(coupling.lattice())))
}
