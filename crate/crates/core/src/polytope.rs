//! Rational polytopes in halfspace and vertex presentation: conversion,
//! exact volumes, normalized facet volumes, sections, chords and the
//! surface-area scaling used by the certified search.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::extreme_rays;
use crate::linalg::rank;
use crate::lp::{maximize, LpOutcome};
use crate::rational::{
    check_dim, dot, is_zero_vec, norm1, norm2, pow, primitive, qi, serde_q, sqrt_enclosure, to_f64,
    Enclosure, Rational, VecQ, DEFAULT_SQRT_BITS,
};

/// Polytope `{x : a_j·x <= b_j}` with an irredundant facet list.
#[derive(Debug, Clone)]
pub struct HPolytope {
    n: usize,
    a: Vec<VecQ>,
    b: VecQ,
    vertices: Vec<VecQ>,
    omegas: OnceLock<VecQ>,
}

/// Convex hull of a finite point set; only the extreme points are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    n: usize,
    vertices: Vec<VecQ>,
}

/// Per-facet data: normal `a_j`, offset `β_j`, normalized facet volume
/// `ω_j = vol_{n-1}(F_j)/‖a_j‖` and `‖a_j‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetData {
    #[serde(with = "serde_q::vec")]
    pub normal: VecQ,
    #[serde(with = "serde_q")]
    pub offset: Rational,
    #[serde(with = "serde_q")]
    pub omega: Rational,
    #[serde(with = "serde_q")]
    pub norm2: Rational,
}

#[derive(Debug, Clone)]
pub struct SurfaceArea {
    pub approx: f64,
    pub enclosure: Enclosure,
}

#[derive(Debug, Clone)]
pub struct PolytopeSummary {
    pub dimension: usize,
    pub facets: usize,
    pub vertices: usize,
    pub volume: Rational,
    pub surface: SurfaceArea,
    /// Rational lower bound on `vol^{n-1}/S^n`.
    pub iso_lower: Rational,
}

/// A polytope dilated so that `1 <= S <= 1 + 1/n` is certified by a
/// rational enclosure of the surface area.
#[derive(Debug, Clone)]
pub struct ScaledPolytope {
    pub sigma: Rational,
    pub polytope: HPolytope,
    pub surface: Enclosure,
}

// ---------------------------------------------------------------------------
// conversions

/// Facets `(a, β)` of `conv(points)` in `R^d`, as primitive integer rows,
/// sorted lexicographically.
fn facets_of_points(points: &[VecQ], d: usize) -> Result<Vec<(VecQ, Rational)>> {
    if points.is_empty() {
        return Err(Error::Empty);
    }
    // (a, β) with β - a·v >= 0
    let rows: Vec<VecQ> = points
        .iter()
        .map(|v| {
            let mut r: VecQ = v.iter().map(|x| -x).collect();
            r.push(Rational::one());
            r
        })
        .collect();
    let rays = extreme_rays(&rows, d + 1)
        .map_err(|_| Error::Degenerate("points do not affinely span the space".into()))?;
    let mut facets: Vec<(VecQ, Rational)> = rays
        .into_iter()
        .filter(|r| !is_zero_vec(&r[..d]))
        .map(|mut r| {
            let beta = r.pop().unwrap();
            (r, beta)
        })
        .collect();
    facets.sort();
    Ok(facets)
}

/// Vertices of `{x : a x <= b}` via the homogenized cone; fails if unbounded.
fn vertices_of_halfspaces(a: &[VecQ], b: &[Rational], n: usize) -> Result<Vec<VecQ>> {
    let mut rows: Vec<VecQ> = a
        .iter()
        .zip(b)
        .map(|(ai, bi)| {
            let mut r: VecQ = ai.iter().map(|x| -x).collect();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut t = vec![Rational::zero(); n + 1];
    t[n] = Rational::one();
    rows.push(t);
    let rays = extreme_rays(&rows, n + 1).map_err(|_| Error::Unbounded)?;
    let mut verts = Vec::new();
    for r in rays {
        let t = &r[n];
        if t.is_zero() {
            return Err(Error::Unbounded);
        }
        verts.push(r[..n].iter().map(|x| x / t).collect::<VecQ>());
    }
    if verts.is_empty() {
        return Err(Error::Empty);
    }
    verts.sort();
    Ok(verts)
}

/// `(margin, point)` maximizing `min_j (b_j - a_j·x)/‖a_j‖₁`, margin capped at 1.
fn interior_margin(a: &[VecQ], b: &[Rational], n: usize) -> Option<(Rational, VecQ)> {
    let mut rows: Vec<VecQ> = a
        .iter()
        .map(|ai| {
            let mut r = ai.clone();
            r.push(norm1(ai));
            r
        })
        .collect();
    let mut bb = b.to_vec();
    let mut cap = vec![Rational::zero(); n + 1];
    cap[n] = Rational::one();
    rows.push(cap.clone());
    bb.push(Rational::one());
    match maximize(&cap, &rows, &bb) {
        LpOutcome::Optimal { value, mut x } => {
            x.pop();
            Some((value, x))
        }
        _ => None,
    }
}

fn drop_coord(v: &[Rational], k: usize) -> VecQ {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, x)| x.clone())
        .collect()
}

/// `vol_{d-1}(F)/‖a‖` for the facet `F = conv{p : a·p = β}`. Projecting out
/// a coordinate `k` with `a_k != 0` scales the facet volume by `|a_k|/‖a‖`.
fn facet_omega(points: &[VecQ], a: &[Rational], beta: &Rational, d: usize) -> Result<Rational> {
    let k = a.iter().position(|x| !x.is_zero()).ok_or(Error::ZeroVector)?;
    let on: Vec<VecQ> = points
        .iter()
        .filter(|p| dot(a, p) == *beta)
        .map(|p| drop_coord(p, k))
        .collect();
    let vol = volume_rec(&on, d - 1, 0)?;
    Ok(vol / a[k].abs())
}

/// Volume of `conv(points)` in `R^d` by coning from `points[apex]` over the
/// facets; facet volumes are computed recursively in one dimension less.
fn volume_rec(points: &[VecQ], d: usize, apex: usize) -> Result<Rational> {
    if d == 1 {
        let lo = points.iter().map(|p| &p[0]).min().ok_or(Error::Empty)?;
        let hi = points.iter().map(|p| &p[0]).max().ok_or(Error::Empty)?;
        return Ok(hi - lo);
    }
    let facets = facets_of_points(points, d)?;
    let apex = &points[apex];
    let mut sum = Rational::zero();
    for (a, beta) in &facets {
        let h = beta - dot(a, apex);
        if h.is_zero() {
            continue;
        }
        sum += h * facet_omega(points, a, beta, d)?;
    }
    Ok(sum / qi(d as i64))
}

// ---------------------------------------------------------------------------
// VPolytope

impl VPolytope {
    pub fn new(n: usize, points: Vec<VecQ>) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension("n >= 1".into()));
        }
        for p in &points {
            check_dim(p, n)?;
        }
        let mut pts = points;
        pts.sort();
        pts.dedup();
        let facets = facets_of_points(&pts, n)?;
        let vertices: Vec<VecQ> = pts
            .into_iter()
            .filter(|p| {
                let normals: Vec<VecQ> = facets
                    .iter()
                    .filter(|(a, b)| dot(a, p) == *b)
                    .map(|(a, _)| a.clone())
                    .collect();
                rank(&normals) == n
            })
            .collect();
        Ok(Self { n, vertices })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[VecQ] {
        &self.vertices
    }

    /// Exact volume; `apex` selects the cone point (any vertex gives the same value).
    pub fn volume_with_apex(&self, apex: usize) -> Result<Rational> {
        if apex >= self.vertices.len() {
            return Err(Error::OutOfRange(format!("apex index {apex}")));
        }
        volume_rec(&self.vertices, self.n, apex)
    }

    pub fn volume(&self) -> Result<Rational> {
        self.volume_with_apex(0)
    }

    pub fn to_h(&self) -> Result<HPolytope> {
        let facets = facets_of_points(&self.vertices, self.n)?;
        let (a, b) = facets.into_iter().unzip();
        Ok(HPolytope::from_parts(self.n, a, b, self.vertices.clone()))
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().map(to_f64).collect()).collect()
    }
}

pub fn v_to_h(q: &VPolytope) -> Result<HPolytope> {
    q.to_h()
}

pub fn h_to_v(p: &HPolytope) -> VPolytope {
    p.to_v()
}

// ---------------------------------------------------------------------------
// HPolytope

impl HPolytope {
    /// Validates boundedness and full-dimensionality and removes redundant
    /// inequalities (first of any duplicate pair goes first).
    pub fn new(n: usize, a: Vec<VecQ>, b: VecQ) -> Result<Self> {
        if n == 0 {
            return Err(Error::UnsupportedDimension("n >= 1".into()));
        }
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        for row in &a {
            check_dim(row, n)?;
            if is_zero_vec(row) {
                return Err(Error::Degenerate("zero row in halfspace description".into()));
            }
        }
        match interior_margin(&a, &b, n) {
            None => return Err(Error::Empty),
            Some((m, _)) if !m.is_positive() => {
                return Err(Error::Degenerate("polytope is not full-dimensional".into()))
            }
            _ => {}
        }
        let mut keep: Vec<bool> = vec![true; a.len()];
        for k in 0..a.len() {
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for j in 0..a.len() {
                if j != k && keep[j] {
                    rows.push(a[j].clone());
                    rhs.push(b[j].clone());
                }
            }
            rows.push(a[k].clone());
            rhs.push(&b[k] + Rational::one());
            if let LpOutcome::Optimal { value, .. } = maximize(&a[k], &rows, &rhs) {
                if value <= b[k] {
                    keep[k] = false;
                }
            }
        }
        let (a, b): (Vec<VecQ>, VecQ) = a
            .into_iter()
            .zip(b)
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(ab, _)| ab)
            .unzip();
        let vertices = vertices_of_halfspaces(&a, &b, n)?;
        Ok(Self::from_parts(n, a, b, vertices))
    }

    pub(crate) fn from_parts(n: usize, a: Vec<VecQ>, b: VecQ, vertices: Vec<VecQ>) -> Self {
        Self { n, a, b, vertices, omegas: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_facets(&self) -> usize {
        self.a.len()
    }

    pub fn normals(&self) -> &[VecQ] {
        &self.a
    }

    pub fn offsets(&self) -> &[Rational] {
        &self.b
    }

    pub fn vertices(&self) -> &[VecQ] {
        &self.vertices
    }

    pub fn to_v(&self) -> VPolytope {
        VPolytope { n: self.n, vertices: self.vertices.clone() }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.a.iter().zip(&self.b).all(|(a, b)| dot(a, x) <= *b)
    }

    pub fn origin_interior(&self) -> bool {
        self.b.iter().all(Signed::is_positive)
    }

    /// Normalized facet volumes `ω_j`, one per facet, in facet order.
    pub fn omegas(&self) -> &[Rational] {
        self.omegas.get_or_init(|| {
            self.a
                .iter()
                .zip(&self.b)
                .map(|(a, b)| facet_omega(&self.vertices, a, b, self.n).expect("facet of valid polytope"))
                .collect()
        })
    }

    pub fn volume(&self) -> Rational {
        volume_rec(&self.vertices, self.n, 0).expect("valid polytope")
    }

    pub fn facet_data(&self) -> Result<Vec<FacetData>> {
        if !self.origin_interior() {
            return Err(Error::OriginNotInterior);
        }
        Ok(self
            .a
            .iter()
            .zip(&self.b)
            .zip(self.omegas())
            .map(|((a, b), w)| FacetData {
                normal: a.clone(),
                offset: b.clone(),
                omega: w.clone(),
                norm2: norm2(a),
            })
            .collect())
    }

    /// Interior point maximizing the 1-norm-weighted margin.
    pub fn interior_point(&self) -> VecQ {
        interior_margin(&self.a, &self.b, self.n).expect("full-dimensional polytope").1
    }

    /// Translate by `-x` for the point `x` given.
    pub fn translated(&self, x: &[Rational]) -> Self {
        let b = self.a.iter().zip(&self.b).map(|(a, b)| b - dot(a, x)).collect();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(x).map(|(p, s)| p - s).collect())
            .collect();
        let out = Self::from_parts(self.n, self.a.clone(), b, vertices);
        if let Some(w) = self.omegas.get() {
            let _ = out.omegas.set(w.clone());
        }
        out
    }

    /// Copy with the origin in the interior; unchanged if it already is.
    pub fn translate_origin_interior(&self) -> Self {
        if self.origin_interior() {
            return self.clone();
        }
        self.translated(&self.interior_point())
    }

    pub fn scaled(&self, sigma: &Rational) -> Self {
        assert!(sigma.is_positive());
        let b = self.b.iter().map(|x| x * sigma).collect();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x * sigma).collect())
            .collect();
        let out = Self::from_parts(self.n, self.a.clone(), b, vertices);
        if let Some(w) = self.omegas.get() {
            let f = pow(sigma, self.n as u32 - 1);
            let _ = out.omegas.set(w.iter().map(|x| x * &f).collect());
        }
        out
    }

    /// `S(P) = Σ ω_j ‖a_j‖` with a rational enclosure of relative width `2^-bits`.
    pub fn surface_area_with(&self, bits: u32) -> SurfaceArea {
        let norms: Vec<Enclosure> = self.a.iter().map(|a| sqrt_enclosure(&norm2(a), bits)).collect();
        let enclosure = Enclosure::weighted_sum(self.omegas().iter().zip(norms.iter()));
        SurfaceArea { approx: enclosure.midpoint_f64(), enclosure }
    }

    pub fn surface_area(&self) -> SurfaceArea {
        self.surface_area_with(DEFAULT_SQRT_BITS)
    }

    /// `ν <= vol^{n-1}/S^n` using the upper end of the surface enclosure.
    pub fn iso_lower_bound(&self, bits: u32) -> Rational {
        let s = self.surface_area_with(bits).enclosure;
        pow(&self.volume(), self.n as u32 - 1) / pow(&s.hi, self.n as u32)
    }

    /// Rational upper bound on `vol^{n-1}/S^n`.
    pub fn iso_upper_bound(&self, bits: u32) -> Rational {
        let s = self.surface_area_with(bits).enclosure;
        pow(&self.volume(), self.n as u32 - 1) / pow(&s.lo, self.n as u32)
    }

    /// Dilate to `1 <= S <= 1 + 1/n` by bisection on rational `σ`.
    pub fn scale_to_unit_surface(&self) -> ScaledPolytope {
        let n = self.n as u32;
        let s = self.surface_area().enclosure;
        let upper = Rational::one() + Rational::new(BigInt::one(), BigInt::from(n));
        let e = n.saturating_sub(1).max(1);
        let at = |sig: &Rational| {
            let f = if n == 1 { Rational::one() } else { pow(sig, e) };
            (&s.lo * &f, &s.hi * &f)
        };
        let mut lo = Rational::zero();
        let mut hi = if s.lo >= Rational::one() { Rational::one() } else { s.lo.recip() };
        let sigma = loop {
            let mid = (&lo + &hi) / qi(2);
            let (slo, shi) = at(&mid);
            if slo < Rational::one() {
                lo = mid;
            } else if shi > upper {
                hi = mid;
            } else {
                break mid;
            }
        };
        let polytope = self.scaled(&sigma);
        let surface = polytope.surface_area().enclosure;
        ScaledPolytope { sigma, polytope, surface }
    }

    pub fn summary(&self) -> PolytopeSummary {
        PolytopeSummary {
            dimension: self.n,
            facets: self.a.len(),
            vertices: self.vertices.len(),
            volume: self.volume(),
            surface: self.surface_area(),
            iso_lower: self.iso_lower_bound(DEFAULT_SQRT_BITS),
        }
    }

    /// Exact `vol_{n-1}(P ∩ e_i^⊥)`; zero when the section is empty or
    /// lower-dimensional.
    pub fn section_volume(&self, i: usize) -> Result<Rational> {
        if self.n < 2 {
            return Err(Error::UnsupportedDimension("sections need n >= 2".into()));
        }
        if i >= self.n {
            return Err(Error::OutOfRange(format!("coordinate index {i}")));
        }
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, beta) in self.a.iter().zip(&self.b) {
            let r = drop_coord(row, i);
            if is_zero_vec(&r) {
                if beta.is_negative() {
                    return Ok(Rational::zero());
                }
                continue;
            }
            a.push(r);
            b.push(beta.clone());
        }
        match interior_margin(&a, &b, self.n - 1) {
            Some((m, _)) if m.is_positive() => {}
            _ => return Ok(Rational::zero()),
        }
        let sec = HPolytope::new(self.n - 1, a, b)?;
        Ok(sec.volume())
    }

    /// `t = max{s : x ∈ P, x + s v ∈ P}`; the longest chord parallel to `v`
    /// has length `t‖v‖`.
    pub fn longest_chord(&self, v: &[Rational]) -> Result<Rational> {
        check_dim(v, self.n)?;
        if is_zero_vec(v) {
            return Err(Error::ZeroVector);
        }
        let n = self.n;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (a, b) in self.a.iter().zip(&self.b) {
            let mut r = a.clone();
            r.push(Rational::zero());
            rows.push(r);
            rhs.push(b.clone());
            let mut r = a.clone();
            r.push(dot(a, v));
            rows.push(r);
            rhs.push(b.clone());
        }
        let mut c = vec![Rational::zero(); n + 1];
        c[n] = Rational::one();
        match maximize(&c, &rows, &rhs) {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Err(Error::Unbounded),
            LpOutcome::Infeasible => Err(Error::Empty),
        }
    }

    /// Apply a rational linear map `x -> M x` (M invertible).
    pub fn transformed(&self, m: &[VecQ]) -> Result<Self> {
        let verts: Vec<VecQ> = self
            .vertices
            .iter()
            .map(|v| m.iter().map(|row| dot(row, v)).collect())
            .collect();
        VPolytope::new(self.n, verts)?.to_h()
    }

    /// Rows rescaled to primitive integer normals (offsets adjusted).
    pub fn normalized_rows(&self) -> Self {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (row, beta) in self.a.iter().zip(&self.b) {
            let p = primitive(row);
            let k = row.iter().position(|x| !x.is_zero()).unwrap();
            let f = &p[k] / &row[k];
            b.push(beta * &f);
            a.push(p);
        }
        Self::from_parts(self.n, a, b, self.vertices.clone())
    }
}

impl ScaledPolytope {
    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    /// `1 <= S(σP) <= 1 + 1/n` as certified by the stored enclosure.
    pub fn is_certified(&self) -> bool {
        let n = self.dim() as i64;
        self.surface.lo >= Rational::one()
            && self.surface.hi <= Rational::one() + Rational::new(BigInt::one(), BigInt::from(n))
    }
}

// ---------------------------------------------------------------------------
// constructors for common bodies

pub fn cube(n: usize, lo: i64, hi: i64) -> HPolytope {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        a.push(e.clone());
        b.push(qi(hi));
        e[i] = -Rational::one();
        a.push(e);
        b.push(qi(-lo));
    }
    HPolytope::new(n, a, b).expect("cube")
}

pub fn standard_simplex(n: usize) -> HPolytope {
    let mut pts = vec![vec![Rational::zero(); n]];
    for i in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        pts.push(e);
    }
    VPolytope::new(n, pts).and_then(|v| v.to_h()).expect("simplex")
}

/// `conv{±α_i e_i}`.
pub fn coordinate_crosspolytope(alpha: &[Rational]) -> HPolytope {
    let n = alpha.len();
    let mut pts = Vec::new();
    for (i, a) in alpha.iter().enumerate() {
        let mut e = vec![Rational::zero(); n];
        e[i] = a.clone();
        pts.push(e.clone());
        e[i] = -a.clone();
        pts.push(e);
    }
    VPolytope::new(n, pts).and_then(|v| v.to_h()).expect("crosspolytope")
}

pub fn crosspolytope(n: usize) -> HPolytope {
    coordinate_crosspolytope(&vec![Rational::one(); n])
}

pub fn from_vertices(n: usize, pts: &[&[i64]]) -> Result<HPolytope> {
    VPolytope::new(n, pts.iter().map(|p| p.iter().map(|&x| qi(x)).collect()).collect())?.to_h()
}
