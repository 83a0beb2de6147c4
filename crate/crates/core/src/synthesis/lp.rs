//! Dense two-phase simplex over exact rationals.
//!
//! Solves `min cᵀx  s.t.  Ax = b, x ≥ 0` with Bland's rule, so the pivot
//! sequence and the returned vertex depend only on column order.

use num_traits::{Signed, Zero};

use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>, // each row: coefficients then rhs
    basis: Vec<usize>,
    width: usize, // number of variable columns
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut r = cost.to_vec();
        for (i, &bcol) in self.basis.iter().enumerate() {
            let cb = &cost[bcol];
            if cb.is_zero() {
                continue;
            }
            for (j, rj) in r.iter_mut().enumerate() {
                if !self.rows[i][j].is_zero() {
                    *rj -= cb * &self.rows[i][j];
                }
            }
        }
        r
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (i, &b)| {
                acc + &cost[b] * self.rhs(i)
            })
    }

    /// Runs Bland-rule iterations; `allowed` filters entering columns.
    fn optimize(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> bool {
        loop {
            let reduced = self.reduced_costs(cost);
            let Some(col) = (0..self.width).find(|&j| allowed(j) && reduced[j].is_negative())
            else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

pub(crate) fn minimize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        assert_eq!(row.len(), n, "constraint row width");
        let flip = rhs.is_negative();
        let mut r: Vec<Rational> = row
            .iter()
            .map(|v| if flip { -v.clone() } else { v.clone() })
            .collect();
        r.extend((0..m).map(|k| {
            if k == i {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        }));
        r.push(if flip { -rhs.clone() } else { rhs.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..width).collect(),
        width,
    };

    let phase1: Vec<Rational> = (0..width)
        .map(|j| {
            if j >= n {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
        .collect();
    t.optimize(&phase1, |_| true);
    if t.objective(&phase1).is_positive() {
        return LpOutcome::Infeasible;
    }
    // move zero-level artificials out of the basis where possible
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }

    let mut phase2 = c.to_vec();
    phase2.extend((0..m).map(|_| Rational::zero()));
    if !t.optimize(&phase2, |j| j < n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = t.rhs(i).clone();
        }
    }
    let value = t.objective(&phase2);
    LpOutcome::Optimal { x, value }
}
