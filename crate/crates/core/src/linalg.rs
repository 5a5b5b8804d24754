//! Exact rational linear algebra on small dense matrices.

use num_traits::{One, Signed, Zero};

use crate::rational::{dot, norm2, primitive, Rational, VecQ};

/// Row echelon reduction in place; returns the pivot columns.
pub fn rref(m: &mut [VecQ]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (top, rest) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (x, y) in rest.iter_mut().zip(top.iter()) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[VecQ]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of `{x : r·x = 0 for every row r}` in ambient dimension `n`.
pub fn null_space(rows: &[VecQ], n: usize) -> Vec<VecQ> {
    let mut m: Vec<VecQ> = rows.iter().filter(|r| !r.iter().all(Zero::is_zero)).cloned().collect();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn determinant(rows: &[VecQ]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &piv;
            let (a, b) = m.split_at_mut(i);
            for (x, y) in b[0][c..].iter_mut().zip(a[c][c..].iter()) {
                *x -= &f * y;
            }
        }
    }
    det
}

/// Solve the square system `m x = rhs`; `None` if singular.
pub fn solve(m: &[VecQ], rhs: &[Rational]) -> Option<VecQ> {
    let n = m.len();
    let mut aug: Vec<VecQ> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// Exact Gram–Schmidt. Each output vector is rescaled to a primitive integer
/// vector, which keeps entry sizes under control; zero residuals are dropped.
pub fn gram_schmidt(vs: &[VecQ]) -> Vec<VecQ> {
    let mut out: Vec<(VecQ, Rational)> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for (b, bb) in &out {
            let c = dot(&w, b) / bb;
            if !c.is_zero() {
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= &c * y;
                }
            }
        }
        if w.iter().all(Zero::is_zero) {
            continue;
        }
        let w = primitive(&w);
        let ww = norm2(&w);
        out.push((w, ww));
    }
    out.into_iter().map(|(w, _)| w).collect()
}

/// Sign of the first nonzero entry (`0` for the zero vector).
pub fn leading_sign(v: &[Rational]) -> i8 {
    for x in v {
        if x.is_positive() {
            return 1;
        }
        if x.is_negative() {
            return -1;
        }
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi, vecq};

    #[test]
    fn null_space_of_single_row() {
        let ns = null_space(&[vecq(&[1, 0, 0])], 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(v, &vecq(&[1, 0, 0])).is_zero());
        }
        assert_eq!(null_space(&[], 2).len(), 2);
        assert!(null_space(&[vecq(&[1, 0]), vecq(&[0, 1])], 2).is_empty());
    }

    #[test]
    fn determinant_known() {
        let m = vec![vecq(&[2, 0, 1]), vecq(&[1, 3, 2]), vecq(&[1, 1, 1])];
        // 2*(3-2) - 0 + 1*(1-3) = 0
        assert_eq!(determinant(&m), qi(0));
        let m = vec![vecq(&[0, 1]), vecq(&[1, 0])];
        assert_eq!(determinant(&m), qi(-1));
    }

    #[test]
    fn solve_small() {
        let m = vec![vec![q(1, 2), qi(1)], vec![qi(3), qi(-1)]];
        let x = solve(&m, &[qi(2), qi(5)]).unwrap();
        assert_eq!(dot(&m[0], &x), qi(2));
        assert_eq!(dot(&m[1], &x), qi(5));
    }

    #[test]
    fn gram_schmidt_orthogonal() {
        let g = gram_schmidt(&[vecq(&[1, 1, 0]), vecq(&[1, 0, 1]), vecq(&[2, 1, 1])]);
        assert_eq!(g.len(), 2);
        assert!(dot(&g[0], &g[1]).is_zero());
    }
}
