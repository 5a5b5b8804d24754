//! Exact rational linear programming (two-phase tableau simplex, Bland's rule).
//!
//! Problems are stated as `maximize c·x subject to A x <= b` with `x` free.
//! The sizes seen in this crate are tiny (a few dozen rows), so a dense
//! tableau is adequate.

use num_traits::{One, Signed, Zero};

use crate::rational::{Rational, VecQ};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: VecQ },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    rows: Vec<VecQ>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Run the simplex method maximizing `cost` over columns `< active`.
    /// Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[Rational], active: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..active {
                if self.basis.contains(&j) || cost[j].is_zero() && self.rows.iter().all(|r| r[j].is_zero()) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                        rc -= &cost[b] * &self.rows[i][j];
                    }
                }
                if rc.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, j);
        }
    }
}

/// Maximize `c·x` subject to `a x <= b` over free `x`.
pub fn maximize(c: &[Rational], a: &[VecQ], b: &[Rational]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let n_art = b.iter().filter(|v| v.is_negative()).count();
    // columns: x+ (n), x- (n), slack (m), artificial (n_art)
    let width = 2 * n + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![Rational::zero(); width + 1];
        for k in 0..n {
            row[k] = a[i][k].clone();
            row[n + k] = -a[i][k].clone();
        }
        row[2 * n + i] = Rational::one();
        row[width] = b[i].clone();
        if b[i].is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
            let col = 2 * n + m + art;
            row[col] = Rational::one();
            basis.push(col);
            art += 1;
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, width };

    if n_art > 0 {
        let mut cost1 = vec![Rational::zero(); width];
        for k in 0..n_art {
            cost1[2 * n + m + k] = -Rational::one();
        }
        t.optimize(&cost1, width);
        let infeas: Rational = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bv)| bv >= 2 * n + m)
            .map(|(i, _)| t.rhs(i).clone())
            .sum();
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive remaining (zero-valued) artificials out of the basis
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= 2 * n + m {
                if let Some(j) = (0..2 * n + m).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, j);
                    i += 1;
                } else {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            } else {
                i += 1;
            }
        }
        for row in t.rows.iter_mut() {
            for x in row[2 * n + m..width].iter_mut() {
                *x = Rational::zero();
            }
        }
    }

    let mut cost = vec![Rational::zero(); width];
    for k in 0..n {
        cost[k] = c[k].clone();
        cost[n + k] = -c[k].clone();
    }
    if !t.optimize(&cost, 2 * n + m) {
        return LpOutcome::Unbounded;
    }
    let mut y = vec![Rational::zero(); width];
    for (i, &bv) in t.basis.iter().enumerate() {
        y[bv] = t.rhs(i).clone();
    }
    let x: VecQ = (0..n).map(|k| &y[k] - &y[n + k]).collect();
    let value = crate::rational::dot(c, &x);
    LpOutcome::Optimal { value, x }
}
