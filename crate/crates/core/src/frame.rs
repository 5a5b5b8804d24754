//! Frames, pseudo frames and the projection average.
//!
//! For a frame `u_1..u_n` the projection average is
//! `Ψ(P;F) = Π_i vol_{n-1}(P|u_i^⊥)` and the LW-ratio is
//! `Λ(P;F) = vol(P)^{n-1} / Ψ(P;F)`, which never exceeds 1.

use num_traits::{One, Zero};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{crosspolytope, HPolytope};
use crate::rational::{check_dim, dot, norm2, pow, qi, serde_q, sqrt_enclosure, to_f64, Rational, VecQ};
use crate::zonotope::{projection_body, support_f64, Zonotope};

pub const ORTHO_TOL: f64 = 1e-12;

/// Orthonormal frame with real coordinates, one row per direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame(Vec<Vec<f64>>);

impl Frame {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
            for (k, s) in rows.iter().enumerate().skip(i) {
                let d: f64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
                let want = if i == k { 1.0 } else { 0.0 };
                if (d - want).abs() > ORTHO_TOL {
                    return Err(Error::NotOrthonormal(format!("<u{i}, u{k}> = {d}")));
                }
            }
        }
        Ok(Self(rows))
    }

    pub fn coordinate(n: usize) -> Self {
        Self((0..n).map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect())
    }

    /// Orthonormalize arbitrary rows; fails on (near) dependence.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        orthonormalize(rows)
            .map(Self)
            .ok_or_else(|| Error::NotOrthonormal("rows are linearly dependent".into()))
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, r) in self.0.iter().enumerate() {
            for (k, s) in self.0.iter().enumerate() {
                let d: f64 = r.iter().zip(s).map(|(a, b)| a * b).sum();
                let want = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((d - want).abs());
            }
        }
        worst
    }
}

/// Gram–Schmidt with one re-orthogonalization pass; `None` if the rows are
/// numerically dependent.
pub fn orthonormalize(rows: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for r in rows {
        let mut v = r.clone();
        for _ in 0..2 {
            for b in &out {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
    Some(out)
}

/// Orthonormalized Gaussian sample.
pub fn random_frame_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Frame {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        if let Some(o) = orthonormalize(&rows) {
            return Frame(o);
        }
    }
}

/// `Ψ(P;F)` in floating point.
pub fn psi(p: &HPolytope, f: &Frame) -> Result<f64> {
    psi_zonotope(&projection_body(p), f)
}

pub fn psi_zonotope(z: &Zonotope, f: &Frame) -> Result<f64> {
    if f.dim() != z.n {
        return Err(Error::DimensionMismatch { expected: z.n, got: f.dim() });
    }
    let g = z.generators_f64();
    Ok(f.rows().iter().map(|u| support_f64(&g, u)).product())
}

pub fn lambda_ratio(p: &HPolytope, f: &Frame) -> Result<f64> {
    let v = to_f64(&p.volume());
    Ok(v.powi(p.dim() as i32 - 1) / psi(p, f)?)
}

/// Exactly orthogonal rational directions `w_i` with
/// `1 <= ‖w_i‖² <= (1+ρ)²`, optionally tied to facets `a_{j_i}·w_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoFrame {
    #[serde(with = "serde_q::mat")]
    pub w: Vec<VecQ>,
    #[serde(with = "serde_q")]
    pub rho: Rational,
    pub r_choice: Vec<usize>,
}

impl PseudoFrame {
    pub fn new(w: Vec<VecQ>, rho: Rational) -> Result<Self> {
        let n = w.len();
        let hi = pow(&(Rational::one() + &rho), 2);
        for (i, wi) in w.iter().enumerate() {
            check_dim(wi, n)?;
            let s = norm2(wi);
            if s < Rational::one() || s > hi {
                return Err(Error::InvalidPseudoFrame(format!(
                    "‖w{i}‖² = {s} outside [1, (1+ρ)²]"
                )));
            }
            for (k, wk) in w.iter().enumerate().take(i) {
                if !dot(wi, wk).is_zero() {
                    return Err(Error::InvalidPseudoFrame(format!("w{k} and w{i} not orthogonal")));
                }
            }
        }
        Ok(Self { w, rho, r_choice: Vec::new() })
    }

    /// Attach facet assignments and check `a_{j_i}·w_i = 0` for `i < n-1`.
    pub fn with_facets(mut self, r_choice: Vec<usize>, normals: &[VecQ]) -> Result<Self> {
        for (i, &j) in r_choice.iter().enumerate() {
            let a = normals
                .get(j)
                .ok_or_else(|| Error::OutOfRange(format!("facet index {j}")))?;
            let w = self
                .w
                .get(i)
                .ok_or_else(|| Error::InvalidPseudoFrame("too many facet assignments".into()))?;
            if !dot(a, w).is_zero() {
                return Err(Error::InvalidPseudoFrame(format!("w{i} not orthogonal to facet {j}")));
            }
        }
        self.r_choice = r_choice;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.w.iter().map(|w| w.iter().map(to_f64).collect()).collect()
    }
}

/// `2^{-n} Π_i Σ_j ω_j |w_i·a_j|`, i.e. the product of the projection-body
/// support values at the `w_i`.
pub fn pseudo_average(p: &HPolytope, w: &PseudoFrame) -> Result<Rational> {
    if w.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: w.dim() });
    }
    let z = projection_body(p);
    Ok(w.w.iter().map(|x| z.support(x)).product())
}

/// Exact `Λ(P;F)²` for the frame obtained by normalizing exactly orthogonal
/// rational directions.
pub fn lambda_squared_rational(p: &HPolytope, dirs: &[VecQ]) -> Result<Rational> {
    let n = p.dim();
    if dirs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dirs.len() });
    }
    for (i, a) in dirs.iter().enumerate() {
        check_dim(a, n)?;
        for b in &dirs[..i] {
            if !dot(a, b).is_zero() {
                return Err(Error::NotOrthonormal("rational directions not orthogonal".into()));
            }
        }
    }
    let z = projection_body(p);
    let vol = pow(&p.volume(), 2 * (n as u32 - 1));
    let num: Rational = dirs.iter().map(|w| norm2(w)).product();
    let den: Rational = dirs.iter().map(|w| pow(&z.support(w), 2)).product();
    Ok(vol * num / den)
}

/// Rational bounds `(Λ_lo, Ψ_hi)` for the normalized rational frame.
pub fn certified_frame_bounds(p: &HPolytope, dirs: &[VecQ], bits: u32) -> (Rational, Rational) {
    let n = p.dim() as u32;
    let z = projection_body(p);
    let mut norm_lo = Rational::one();
    for w in dirs {
        norm_lo *= sqrt_enclosure(&norm2(w), bits).lo;
    }
    let prod: Rational = dirs.iter().map(|w| z.support(w)).product();
    let psi_hi = &prod / &norm_lo;
    let lam_lo = pow(&p.volume(), n - 1) / &psi_hi;
    (lam_lo, psi_hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeFrame {
    pub n: usize,
    #[serde(with = "serde_q::mat")]
    pub directions: Vec<VecQ>,
    #[serde(with = "serde_q")]
    pub lambda: Rational,
}

fn edge_frame(n: usize) -> EdgeFrame {
    let c = crosspolytope(n);
    let mut dirs = Vec::with_capacity(n);
    for i in 0..n / 2 {
        for s in [1, -1] {
            let mut v = vec![Rational::zero(); n];
            v[2 * i] = qi(1);
            v[2 * i + 1] = qi(s);
            dirs.push(v);
        }
    }
    if n % 2 == 1 {
        let mut v = vec![Rational::zero(); n];
        v[n - 1] = qi(1);
        dirs.push(v);
    }
    let z = projection_body(&c);
    // Π‖w_i‖ = 2^{k/2} with k = 2·⌊n/2⌋ edge directions
    let norms = pow(&qi(2), (n / 2) as u32);
    let areas: Rational = dirs.iter().map(|w| z.support(w)).product();
    let lambda = pow(&c.volume(), n as u32 - 1) * norms / areas;
    EdgeFrame { n, directions: dirs, lambda }
}

/// Frame of edge directions `e_{2i-1} ± e_{2i}` of the crosspolytope and its
/// exact LW-ratio. Even `n` only.
pub fn crosspolytope_edge_frame(n: usize) -> Result<EdgeFrame> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::UnsupportedDimension("edge frame needs even n >= 2".into()));
    }
    Ok(edge_frame(n))
}

/// Odd-dimensional variant: `n-1` edge directions plus `e_n`.
pub fn crosspolytope_edge_frame_odd(n: usize) -> Result<EdgeFrame> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension("odd variant needs odd n >= 3".into()));
    }
    Ok(edge_frame(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{cube, from_vertices};
    use crate::rational::{q, vecq};

    #[test]
    fn psi_examples() {
        let sq = cube(2, 0, 1);
        assert!((psi(&sq, &Frame::coordinate(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!((psi(&cube(3, 0, 1), &Frame::coordinate(3)).unwrap() - 1.0).abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let f = Frame::new(vec![vec![h, h], vec![-h, h]]).unwrap();
        assert!((psi(&sq, &f).unwrap() - 2.0).abs() < 1e-12);
        assert!((lambda_ratio(&sq, &f).unwrap() - 0.5).abs() < 1e-12);
        assert!((lambda_ratio(&cube(3, 0, 1), &Frame::coordinate(3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_validation() {
        assert!(Frame::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).is_err());
        assert!(Frame::new(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn pseudo_average_square() {
        let s = cube(2, 0, 1).scale_to_unit_surface();
        let w = PseudoFrame::new(vec![vecq(&[1, 0]), vecq(&[0, 1])], q(1, 10)).unwrap();
        assert_eq!(pseudo_average(&s.polytope, &w).unwrap(), q(1, 16));
        let neg = PseudoFrame::new(vec![vecq(&[-1, 0]), vecq(&[0, -1])], q(1, 10)).unwrap();
        assert_eq!(pseudo_average(&s.polytope, &neg).unwrap(), q(1, 16));
    }

    #[test]
    fn pseudo_frame_rejects_long_vectors() {
        let e = PseudoFrame::new(vec![vecq(&[2, 0]), vecq(&[0, 1])], q(1, 10));
        assert!(matches!(e, Err(Error::InvalidPseudoFrame(_))));
        let f = PseudoFrame::new(vec![vecq(&[1, 0]), vecq(&[0, 1])], q(1, 10)).unwrap();
        assert!(f.clone().with_facets(vec![0], &[vecq(&[0, 1])]).is_ok());
        assert!(f.with_facets(vec![0], &[vecq(&[1, 1])]).is_err());
    }

    #[test]
    fn crosspolytope_constants() {
        assert_eq!(crosspolytope_edge_frame(4).unwrap().lambda, q(3, 8));
        // the planar crosspolytope is a square
        assert_eq!(crosspolytope_edge_frame(2).unwrap().lambda, qi(1));
        assert_eq!(crosspolytope_edge_frame_odd(3).unwrap().lambda, q(4, 9));
        assert!(crosspolytope_edge_frame(3).is_err());
    }

    #[test]
    fn rational_lambda_square() {
        let t = from_vertices(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        let l2 = lambda_squared_rational(&t, &[vecq(&[1, 0]), vecq(&[0, 1])]).unwrap();
        assert_eq!(l2, q(1, 4));
        let (lo, hi) = certified_frame_bounds(&t, &[vecq(&[1, 0]), vecq(&[0, 3])], 60);
        assert_eq!(lo, q(1, 2));
        assert_eq!(hi, qi(1));
    }
}
