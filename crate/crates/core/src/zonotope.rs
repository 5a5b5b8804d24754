//! Projection bodies as zonotopes.
//!
//! For a polytope with facets `a_j·x <= b_j` the projection body is the
//! zonotope with generators `g_j = ω_j a_j / 2`, whose support function
//! `Σ_j |g_j·x|` is the Cauchy projection formula: at a unit vector `u` it
//! equals `vol_{n-1}(P|u^⊥)`.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant, leading_sign};
use crate::lp::{maximize, LpOutcome};
use crate::planar::convex_hull_area;
use crate::polytope::{HPolytope, VPolytope};
use crate::rational::{binomial, check_dim, dot, pow, primitive, qi, serde_q, to_f64, Rational, VecQ};

/// Origin-symmetric zonotope `Σ_j [-g_j, g_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    pub n: usize,
    #[serde(with = "serde_q::mat")]
    pub generators: Vec<VecQ>,
}

/// A real direction; `unit` ones have squared norm within `UNIT_TOL` of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionR(Vec<f64>);

pub const UNIT_TOL: f64 = 1e-12;

impl DirectionR {
    /// Normalize a nonzero vector.
    pub fn unit(v: &[f64]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self(v.iter().map(|x| x / norm).collect()))
    }

    /// Accept a vector that is already unit within tolerance.
    pub fn from_unit(v: &[f64]) -> Result<Self> {
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        if (n2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n2));
        }
        Ok(Self(v.to_vec()))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Parallel generators (such as those of opposite facets) are merged, since
/// `[-g, g] + [-h, h] = [-(g+h), g+h]` when `h` is a positive multiple of `g`.
pub fn projection_body(p: &HPolytope) -> Zonotope {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let mut dirs: Vec<VecQ> = Vec::new();
    let mut generators: Vec<VecQ> = Vec::new();
    for (a, w) in p.normals().iter().zip(p.omegas()) {
        let f = if leading_sign(a) < 0 { -(w * &half) } else { w * &half };
        let g: VecQ = a.iter().map(|x| x * &f).collect();
        let d = primitive(&g);
        match dirs.iter().position(|x| *x == d) {
            Some(i) => {
                for (s, x) in generators[i].iter_mut().zip(&g) {
                    *s += x;
                }
            }
            None => {
                dirs.push(d);
                generators.push(g);
            }
        }
    }
    Zonotope { n: p.dim(), generators }
}

impl Zonotope {
    pub fn new(n: usize, generators: Vec<VecQ>) -> Result<Self> {
        for g in &generators {
            check_dim(g, n)?;
        }
        Ok(Self { n, generators })
    }

    /// Exact support value `Σ_j |g_j·x|`.
    pub fn support(&self, x: &[Rational]) -> Rational {
        self.generators.iter().map(|g| dot(g, x).abs()).sum()
    }

    pub fn generators_f64(&self) -> Vec<Vec<f64>> {
        self.generators.iter().map(|g| g.iter().map(to_f64).collect()).collect()
    }

    /// Exact volume `2^n Σ_{|J|=n} |det g_J|`. Refuses more than
    /// `binom(20, 4)` determinants unless `force` is set.
    pub fn volume(&self, force: bool) -> Result<Rational> {
        let m = self.generators.len();
        let n = self.n;
        let terms = binomial(m as u32, n as u32);
        if !force && terms > binomial(20, 4) {
            return Err(Error::TooExpensive(format!(
                "{terms} determinants for {m} generators in dimension {n}"
            )));
        }
        let mut sum = Rational::zero();
        for idx in (0..m).combinations(n) {
            let rows: Vec<VecQ> = idx.iter().map(|&j| self.generators[j].clone()).collect();
            sum += determinant(&rows).abs();
        }
        Ok(sum * pow(&qi(2), n as u32))
    }

    /// All sign sums `Σ ε_j g_j`; the zonotope is their convex hull.
    pub fn sign_sum_points(&self) -> Vec<VecQ> {
        let m = self.generators.len();
        assert!(m < 24, "too many generators for vertex enumeration");
        (0..1u32 << m)
            .map(|mask| {
                let mut p = vec![Rational::zero(); self.n];
                for (j, g) in self.generators.iter().enumerate() {
                    let pos = mask >> j & 1 == 1;
                    for (x, y) in p.iter_mut().zip(g) {
                        if pos {
                            *x += y;
                        } else {
                            *x -= y;
                        }
                    }
                }
                p
            })
            .collect()
    }

    /// The zonotope as a V-polytope (exponential in the number of generators).
    pub fn to_vpolytope(&self) -> Result<VPolytope> {
        VPolytope::new(self.n, self.sign_sum_points())
    }

    /// `x ∈ Z°` iff `Σ_j |g_j·x| <= 1`.
    pub fn polar_contains(&self, x: &[Rational]) -> bool {
        self.support(x) <= Rational::one()
    }

    /// Half-width of the polar along `e_i`: `max x_i` subject to `Σ_j |g_j·x| <= 1`.
    pub fn polar_axis_extent(&self, i: usize) -> Result<Rational> {
        let n = self.n;
        let m = self.generators.len();
        // variables (x, t): ±g_j·x - t_j <= 0, Σ t_j <= 1
        let mut rows = Vec::with_capacity(2 * m + 1);
        let mut rhs = Vec::with_capacity(2 * m + 1);
        for (j, g) in self.generators.iter().enumerate() {
            for s in [1i64, -1] {
                let mut r = vec![Rational::zero(); n + m];
                for k in 0..n {
                    r[k] = &g[k] * qi(s);
                }
                r[n + j] = -Rational::one();
                rows.push(r);
                rhs.push(Rational::zero());
            }
        }
        let mut tot = vec![Rational::zero(); n + m];
        for t in tot.iter_mut().skip(n) {
            *t = Rational::one();
        }
        rows.push(tot);
        rhs.push(Rational::one());
        let mut c = vec![Rational::zero(); n + m];
        c[i] = Rational::one();
        match maximize(&c, &rows, &rhs) {
            LpOutcome::Optimal { value, .. } => Ok(value),
            _ => Err(Error::Degenerate("zonotope is not full-dimensional".into())),
        }
    }
}

pub fn projection_area(p: &HPolytope, u: &DirectionR) -> Result<f64> {
    if u.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: u.dim() });
    }
    let z = projection_body(p);
    Ok(support_f64(&z.generators_f64(), u.coords()))
}

/// `Σ_j |g_j·x|` in floating point.
pub fn support_f64(gens: &[Vec<f64>], x: &[f64]) -> f64 {
    gens.iter()
        .map(|g| g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs())
        .sum()
}

/// Exact `‖w‖·vol_{n-1}(P|w^⊥)`.
pub fn projection_area_rational(p: &HPolytope, w: &[Rational]) -> Result<Rational> {
    check_dim(w, p.dim())?;
    Ok(projection_body(p).support(w))
}

/// `vol_{n-1}(P|u^⊥)` by projecting the vertices and measuring their hull
/// directly (n = 2 or 3).
pub fn projection_hull_oracle(p: &VPolytope, u: &DirectionR) -> Result<f64> {
    let n = p.dim();
    if u.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.dim() });
    }
    let u = u.coords();
    let verts = p.vertices_f64();
    match n {
        2 => {
            let b = [-u[1], u[0]];
            let proj: Vec<f64> = verts.iter().map(|v| v[0] * b[0] + v[1] * b[1]).collect();
            let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(hi - lo)
        }
        3 => {
            let k = (0..3).min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap();
            let mut b1 = [0.0; 3];
            b1[k] = 1.0;
            for (x, y) in b1.iter_mut().zip(u) {
                *x -= u[k] * y;
            }
            let l = (b1[0] * b1[0] + b1[1] * b1[1] + b1[2] * b1[2]).sqrt();
            b1.iter_mut().for_each(|x| *x /= l);
            let b2 = [
                u[1] * b1[2] - u[2] * b1[1],
                u[2] * b1[0] - u[0] * b1[2],
                u[0] * b1[1] - u[1] * b1[0],
            ];
            let pts: Vec<[f64; 2]> = verts
                .iter()
                .map(|v| {
                    [
                        v[0] * b1[0] + v[1] * b1[1] + v[2] * b1[2],
                        v[0] * b2[0] + v[1] * b2[1] + v[2] * b2[2],
                    ]
                })
                .collect();
            Ok(convex_hull_area(&pts))
        }
        _ => Err(Error::UnsupportedDimension("hull oracle supports n = 2, 3".into())),
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo polar volume

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarEstimate {
    pub estimate: f64,
    pub ci95: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
    pub box_volume: f64,
}

const CHUNK: u64 = 1 << 14;
const FRAC_BITS: u32 = 53;

/// Exact integer form of the membership test for the box-scaled sample
/// `x_i = h_i k_i / 2^53` with odd `k_i`: `Σ_j |Σ_i M_ji k_i| <= bound`.
struct Membership {
    small: Option<(Vec<Vec<i64>>, i128)>,
    big: (Vec<Vec<BigInt>>, BigInt),
}

impl Membership {
    fn new(z: &Zonotope, half: &[Rational]) -> Self {
        let scaled: Vec<VecQ> = z
            .generators
            .iter()
            .map(|g| g.iter().zip(half).map(|(a, h)| a * h).collect())
            .collect();
        let mut den = BigInt::one();
        for r in &scaled {
            for x in r {
                den = den.lcm(x.denom());
            }
        }
        let mat: Vec<Vec<BigInt>> = scaled
            .iter()
            .map(|r| r.iter().map(|x| x.numer() * (&den / x.denom())).collect())
            .collect();
        let bound = den << FRAC_BITS;
        let small = (|| {
            let m: Vec<Vec<i64>> = mat
                .iter()
                .map(|r| r.iter().map(|x| x.to_i64()).collect::<Option<Vec<_>>>())
                .collect::<Option<_>>()?;
            let max = m.iter().flatten().map(|x| x.unsigned_abs() as u128).max().unwrap_or(0);
            let terms = (m.len() * z.n.max(1)) as u128;
            // |Σ_j |Σ_i M_ji k_i|| <= terms · max · 2^53 must fit in i128
            if max.checked_mul(terms)?.checked_shl(FRAC_BITS + 1)? >= 1u128 << 126 {
                return None;
            }
            Some((m, bound.to_i128()?))
        })();
        Self { small, big: (mat, bound) }
    }

    fn contains(&self, k: &[i64]) -> bool {
        if let Some((m, bound)) = &self.small {
            let mut s: i128 = 0;
            for row in m {
                let d: i128 = row.iter().zip(k).map(|(a, b)| *a as i128 * *b as i128).sum();
                s += d.abs();
            }
            return s <= *bound;
        }
        let (m, bound) = &self.big;
        let mut s = BigInt::zero();
        for row in m {
            let d: BigInt = row.iter().zip(k).map(|(a, b)| a * BigInt::from(*b)).sum();
            s += d.abs();
        }
        s <= *bound
    }
}

fn count_chunk(mem: &Membership, n: usize, seed: u64, chunk: u64, count: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut k = vec![0i64; n];
    let mut hits = 0;
    for _ in 0..count {
        for x in k.iter_mut() {
            let r = (rng.random::<u64>() >> (64 - FRAC_BITS)) as i64;
            *x = 2 * r + 1 - (1i64 << FRAC_BITS);
        }
        if mem.contains(&k) {
            hits += 1;
        }
    }
    hits
}

/// Hit-or-miss estimate of `vol(Z°)` over the tight axis box. Each block of
/// samples has its own ChaCha stream, so the result depends only on
/// `(seed, samples)` and not on the worker count.
pub fn polar_volume_mc(z: &Zonotope, samples: u64, seed: u64, threads: usize) -> Result<PolarEstimate> {
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be positive".into()));
    }
    let half: Vec<Rational> = (0..z.n).map(|i| z.polar_axis_extent(i)).collect::<Result<_>>()?;
    if half.iter().any(|h| !h.is_positive()) {
        return Err(Error::Degenerate("polar has zero extent".into()));
    }
    let mem = Membership::new(z, &half);
    let chunks = samples.div_ceil(CHUNK);
    let work = |c: u64| {
        let count = CHUNK.min(samples - c * CHUNK);
        count_chunk(&mem, z.n, seed, c, count)
    };
    let hits: u64 = if threads == 1 {
        (0..chunks).map(work).sum()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::OutOfRange(e.to_string()))?;
        pool.install(|| (0..chunks).into_par_iter().map(work).sum())
    };
    let box_volume: f64 = half.iter().map(|h| 2.0 * to_f64(h)).product();
    let p = hits as f64 / samples as f64;
    let std_error = box_volume * (p * (1.0 - p) / samples as f64).sqrt();
    Ok(PolarEstimate {
        estimate: box_volume * p,
        ci95: 1.96 * std_error,
        std_error,
        hits,
        samples,
        box_volume,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZhangReport {
    pub n: usize,
    #[serde(with = "serde_q")]
    pub lhs: Rational,
    pub lhs_approx: f64,
    pub rhs_estimate: f64,
    pub rhs_ci95: f64,
    pub ratio: f64,
    pub ratio_sigma: f64,
    pub polar: PolarEstimate,
}

/// Compare `vol(P)^{n-1}` with `binom(2n,n) / (n^n vol(Π°P))`; the ratio is
/// at least 1 and equals 1 exactly for simplices.
pub fn zhang_check(p: &HPolytope, samples: u64, seed: u64, threads: usize) -> Result<ZhangReport> {
    let n = p.dim();
    let z = projection_body(p);
    let polar = polar_volume_mc(&z, samples, seed, threads)?;
    let lhs = pow(&p.volume(), n as u32 - 1);
    let c = to_f64(&Rational::from_integer(binomial(2 * n as u32, n as u32)))
        / (n as f64).powi(n as i32);
    let rhs_estimate = c / polar.estimate;
    let rhs_ci95 = rhs_estimate * polar.ci95 / polar.estimate;
    let lhs_approx = to_f64(&lhs);
    let ratio = lhs_approx * polar.estimate / c;
    let ratio_sigma = ratio * polar.std_error / polar.estimate;
    Ok(ZhangReport { n, lhs, lhs_approx, rhs_estimate, rhs_ci95, ratio, ratio_sigma, polar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{cube, from_vertices, standard_simplex};
    use crate::rational::{q, vecq};

    fn t3() -> HPolytope {
        from_vertices(3, &[&[1, 1, 1], &[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]]).unwrap()
    }

    #[test]
    fn parallel_generators_merge() {
        let c = cube(3, -1, 1);
        let z = projection_body(&c);
        assert_eq!(z.generators, vec![vecq(&[4, 0, 0]), vecq(&[0, 4, 0]), vecq(&[0, 0, 4])]);
        assert_eq!(projection_body(&t3()).generators.len(), 4);
        let cross = crate::polytope::crosspolytope(3);
        let zc = projection_body(&cross);
        assert_eq!(zc.generators.len(), 4);
        for x in [vecq(&[1, 2, 3]), vecq(&[-3, 1, 0]), vecq(&[5, -7, 2])] {
            let direct: Rational = cross
                .normals()
                .iter()
                .zip(cross.omegas())
                .map(|(a, w)| (w * dot(a, &x)).abs() / qi(2))
                .sum();
            assert_eq!(zc.support(&x), direct);
        }
    }

    fn axis_zonotope(n: usize) -> Zonotope {
        let gens = (0..n)
            .map(|i| (0..n).map(|k| qi((i == k) as i64)).collect())
            .collect();
        Zonotope::new(n, gens).unwrap()
    }

    #[test]
    fn cube_projection_body() {
        let z = projection_body(&cube(3, 0, 1));
        for i in 0..3 {
            let mut e = vec![qi(0); 3];
            e[i] = qi(1);
            assert_eq!(z.support(&e), qi(1));
        }
        assert_eq!(z.volume(false).unwrap(), qi(8));
        assert_eq!(axis_zonotope(3).volume(false).unwrap(), qi(8));
    }

    #[test]
    fn square_projection_body() {
        let z = projection_body(&cube(2, 0, 1));
        assert_eq!(z.support(&vecq(&[3, -4])), qi(7));
        assert_eq!(projection_area_rational(&cube(2, 0, 1), &vecq(&[3, 4])).unwrap(), qi(7));
    }

    #[test]
    fn tetrahedron_generators() {
        let z = projection_body(&t3());
        assert_eq!(z.generators.len(), 4);
        let x = vec![q(3, 7), qi(-2), q(5, 3)];
        let mx: VecQ = x.iter().map(|v| -v).collect();
        assert_eq!(z.support(&x), z.support(&mx));
    }

    #[test]
    fn zonotope_volume_two_routes() {
        let z = projection_body(&t3());
        let det = z.volume(false).unwrap();
        let hull = z.to_vpolytope().unwrap().volume().unwrap();
        assert_eq!(det, hull);
    }

    #[test]
    fn projection_areas_cube() {
        let c = cube(3, 0, 1);
        let u = DirectionR::unit(&[1.0, 1.0, 1.0]).unwrap();
        assert!((projection_area(&c, &u).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        let e = DirectionR::from_unit(&[1.0, 0.0, 0.0]).unwrap();
        assert!((projection_area(&c, &e).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(projection_area_rational(&c, &vecq(&[1, 1, 1])).unwrap(), qi(3));
        assert!((projection_hull_oracle(&c.to_v(), &u).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        let e3 = DirectionR::from_unit(&[0.0, 0.0, 1.0]).unwrap();
        assert!((projection_hull_oracle(&c.to_v(), &e3).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_area_crosspolytope() {
        let c = crate::polytope::crosspolytope(3);
        let u = DirectionR::unit(&[1.0, -1.0, 0.0]).unwrap();
        assert!((projection_area(&c, &u).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn direction_validation() {
        assert_eq!(DirectionR::unit(&[0.0, 0.0]).unwrap_err(), Error::ZeroVector);
        assert!(matches!(DirectionR::from_unit(&[1.0, 1.0]), Err(Error::NotUnit(_))));
    }

    #[test]
    fn polar_membership_cases() {
        let z = projection_body(&cube(3, 0, 1));
        assert!(z.polar_contains(&vecq(&[0, 0, 0])));
        assert!(axis_zonotope(3).polar_contains(&vecq(&[1, 0, 0])));
        assert!(!z.polar_contains(&vecq(&[5, -7, 3])));
    }

    #[test]
    fn polar_axis_extent_and_cost_gate() {
        let z = projection_body(&cube(3, 0, 1));
        assert_eq!(z.polar_axis_extent(0).unwrap(), qi(1));
        let gens = (0..21).map(|i| vec![qi(1), qi(i), qi(i * i), qi(i * i * i)]).collect();
        let big = Zonotope::new(4, gens).unwrap();
        assert!(matches!(big.volume(false), Err(Error::TooExpensive(_))));
    }

    #[test]
    fn mc_cube_polar_deterministic() {
        // generators e_i/... with polar a cube: polar of a crosspolytope zonotope
        // is hard to build directly, so use Z = axis box whose polar is the crosspolytope
        let z = axis_zonotope(3);
        let a = polar_volume_mc(&z, 50_000, 7, 1).unwrap();
        let b = polar_volume_mc(&z, 50_000, 7, 4).unwrap();
        assert_eq!(a, b);
        let exact = 4.0 / 3.0;
        assert!((a.estimate - exact).abs() <= 3.0 * a.std_error);
    }

    #[test]
    fn zhang_simplex_ratio_near_one() {
        let r = zhang_check(&standard_simplex(3), 200_000, 3, 2).unwrap();
        assert!((r.ratio - 1.0).abs() <= 4.0 * r.ratio_sigma, "{r:?}");
        let c = zhang_check(&cube(3, 0, 1), 200_000, 3, 2).unwrap();
        assert!(c.ratio - 1.0 > 3.0 * c.ratio_sigma);
    }
}
