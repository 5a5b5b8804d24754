//! Double description method: extreme rays of a pointed polyhedral cone
//! `{y : M y >= 0}`, used for both directions of the vertex/facet
//! conversion.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rank, solve};
use crate::rational::{dot, primitive, Rational, VecQ};

#[derive(Clone)]
struct Ray {
    v: VecQ,
    zeros: Vec<u64>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn and_bits(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn count_bits(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

fn is_superset(sup: &[u64], sub: &[u64]) -> bool {
    sup.iter().zip(sub).all(|(s, t)| s & t == *t)
}

/// Extreme rays of `{y in R^d : r·y >= 0 for all rows r}`.
///
/// Fails with [`Error::Degenerate`] when the rows do not have rank `d`
/// (the cone then has a nontrivial lineality space).
pub fn extreme_rays(rows: &[VecQ], d: usize) -> Result<Vec<VecQ>> {
    if rank(rows) < d {
        return Err(Error::Degenerate("cone is not pointed".into()));
    }
    let words = rows.len().div_ceil(64);

    // initial basis: greedily pick d linearly independent rows
    let mut init: Vec<usize> = Vec::new();
    let mut picked: Vec<VecQ> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        picked.push(r.clone());
        if rank(&picked) > init.len() {
            init.push(i);
            if init.len() == d {
                break;
            }
        } else {
            picked.pop();
        }
    }
    let basis: Vec<VecQ> = init.iter().map(|&i| rows[i].clone()).collect();
    let mut rays: Vec<Ray> = Vec::with_capacity(d);
    for k in 0..d {
        let mut e = vec![Rational::zero(); d];
        e[k] = Rational::from_integer(1.into());
        let v = solve(&basis, &e).expect("independent rows");
        let mut zeros = vec![0u64; words];
        for (kk, &i) in init.iter().enumerate() {
            if kk != k {
                set_bit(&mut zeros, i);
            }
        }
        rays.push(Ray { v: primitive(&v), zeros });
    }

    for (i, row) in rows.iter().enumerate() {
        if init.contains(&i) {
            continue;
        }
        let vals: Vec<Rational> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        if neg.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if vals[k].is_zero() {
                    set_bit(&mut r.zeros, i);
                }
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &nq in &neg {
                let common = and_bits(&rays[p].zeros, &rays[nq].zeros);
                if count_bits(&common) + 2 < d {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(k, r)| {
                    k == p || k == nq || !is_superset(&r.zeros, &common)
                });
                if !adjacent {
                    continue;
                }
                let v: VecQ = rays[nq]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(a, b)| &vals[p] * a - &vals[nq] * b)
                    .collect();
                let mut zeros = common;
                set_bit(&mut zeros, i);
                next.push(Ray { v: primitive(&v), zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (k, mut r) in rays.into_iter().enumerate() {
            if vals[k].is_negative() {
                continue;
            }
            if vals[k].is_zero() {
                set_bit(&mut r.zeros, i);
            }
            kept.push(r);
        }
        kept.extend(next);
        rays = kept;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::vecq;

    #[test]
    fn orthant_rays() {
        let rows = vec![vecq(&[1, 0]), vecq(&[0, 1])];
        let rays = extreme_rays(&rows, 2).unwrap();
        assert_eq!(rays.len(), 2);
    }

    #[test]
    fn square_cone_has_four_rays() {
        // homogenized unit square: t>=0, x>=0, y>=0, t-x>=0, t-y>=0 in (x,y,t)
        let rows = vec![
            vecq(&[1, 0, 0]),
            vecq(&[0, 1, 0]),
            vecq(&[-1, 0, 1]),
            vecq(&[0, -1, 1]),
            vecq(&[0, 0, 1]),
        ];
        let rays = extreme_rays(&rows, 3).unwrap();
        assert_eq!(rays.len(), 4);
    }

    #[test]
    fn lineality_rejected() {
        let rows = vec![vecq(&[1, 0])];
        assert!(extreme_rays(&rows, 2).is_err());
    }
}
