//! Certified search over pseudo frames.
//!
//! Every best frame has `n-1` directions parallel to facets, so the search
//! enumerates multisets `j_1 <= ... <= j_{n-1}` of facet indices. Direction
//! `w_i` is drawn from a grid on the shell `1 <= ‖w‖ <= 1+ρ` inside
//! `X_i = {a_{j_i}, w_1, ..., w_{i-1}}^⊥` (the last direction only has the
//! orthogonality constraints). The minimum pseudo average `ψ` satisfies
//! `Ψ(P) <= ψ <= Ψ(P) + τ`.

use std::time::Instant;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, leading_sign, null_space};
use crate::polytope::{HPolytope, ScaledPolytope};
use crate::rational::{
    binomial, dyadic_floor_relative, e_upper, norm2, pow, qi, serde_q, to_f64, Rational, VecQ,
    DEFAULT_SQRT_BITS,
};
use crate::zonotope::{projection_body, Zonotope};

pub const DEFAULT_BUDGET: f64 = 1e9;
const RHO_SLACK_BITS: u32 = 40;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub threads: usize,
    /// Refuse runs whose projected evaluation count exceeds this.
    pub budget: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub grids: u64,
    pub evaluations: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedResult {
    /// Upper bound on `Ψ` of the scaled polytope.
    #[serde(with = "serde_q")]
    pub psi: Rational,
    /// `vol^{n-1}/ψ`, a lower bound on `Λ(P)`.
    #[serde(with = "serde_q")]
    pub lambda_lower: Rational,
    #[serde(with = "serde_q")]
    pub tau: Rational,
    #[serde(with = "serde_q")]
    pub rho: Rational,
    #[serde(with = "serde_q::mat")]
    pub frame: Vec<VecQ>,
    pub r_choice: Vec<usize>,
    pub grid_index: Vec<Vec<i64>>,
    pub stats: SearchStats,
    pub projected: f64,
    #[serde(skip)]
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxResult {
    pub search: CertifiedResult,
    #[serde(with = "serde_q")]
    pub delta: Rational,
    #[serde(with = "serde_q")]
    pub nu: Rational,
    #[serde(with = "serde_q")]
    pub iso_lower: Rational,
    /// `(1+δ)·Λ_lower`.
    #[serde(with = "serde_q")]
    pub lambda_upper: Rational,
    pub warnings: Vec<String>,
}

/// Exactly orthogonal rational basis of `{x : c·x = 0}` with squared norms
/// in `[1, 4)`. Empty when the constraints force `x = 0`.
pub fn near_normal_basis(constraints: &[VecQ], n: usize) -> Vec<VecQ> {
    let ns = null_space(constraints, n);
    gram_schmidt(&ns)
        .into_iter()
        .map(|x| {
            // primitive integer vectors have ‖x‖² >= 1
            let mut x = x;
            let mut s = norm2(&x);
            let half = Rational::new(BigInt::one(), BigInt::from(2));
            while s >= qi(4) {
                x.iter_mut().for_each(|v| *v *= &half);
                s /= qi(4);
            }
            x
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub w: VecQ,
    pub index: Vec<i64>,
}

/// Lattice step `α = ρ/(2n)`.
pub fn grid_step(rho: &Rational, n: usize) -> Rational {
    rho / qi(2 * n as i64)
}

/// All `w = α Σ t_k x_k` with integer `t` and `1 <= ‖w‖² <= (1+ρ)²`, one
/// per antipodal pair (first nonzero coordinate positive), in
/// lexicographic order of `t`.
pub fn grid_shell(basis: &[VecQ], rho: &Rational, n: usize) -> Vec<GridPoint> {
    let q = basis.len();
    if q == 0 {
        return Vec::new();
    }
    let alpha = grid_step(rho, n);
    let s: Vec<Rational> = basis.iter().map(|x| norm2(x)).collect();
    // exact bounds on Σ t_k² s_k
    let lo = (&alpha * &alpha).recip();
    let hi = pow(&(Rational::one() + rho), 2) * &lo;
    let hi_f = to_f64(&hi) * (1.0 + 1e-9) + 1e-9;
    let s_f: Vec<f64> = s.iter().map(to_f64).collect();
    let bound: Vec<i64> = s_f.iter().map(|sk| (hi_f / sk).sqrt().floor() as i64 + 1).collect();

    let mut out = Vec::new();
    let mut t = vec![0i64; q];
    fn rec(
        k: usize,
        partial: f64,
        t: &mut Vec<i64>,
        ctx: (&[f64], &[i64], f64),
        leaf: &mut dyn FnMut(&[i64]),
    ) {
        let (s_f, bound, hi_f) = ctx;
        if k == t.len() {
            leaf(t);
            return;
        }
        for v in -bound[k]..=bound[k] {
            let p = partial + (v * v) as f64 * s_f[k];
            if p > hi_f {
                continue;
            }
            t[k] = v;
            rec(k + 1, p, t, ctx, leaf);
        }
        t[k] = 0;
    }
    let mut leaf = |t: &[i64]| {
        let mut sum = Rational::zero();
        for (tk, sk) in t.iter().zip(&s) {
            if *tk != 0 {
                sum += sk * qi(tk * tk);
            }
        }
        if sum < lo || sum > hi {
            return;
        }
        let mut w = vec![Rational::zero(); n];
        for (tk, x) in t.iter().zip(basis) {
            if *tk == 0 {
                continue;
            }
            let c = &alpha * qi(*tk);
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi += &c * xi;
            }
        }
        if leading_sign(&w) > 0 {
            out.push(GridPoint { w, index: t.to_vec() });
        }
    };
    rec(0, 0.0, &mut t, (&s_f, &bound, hi_f), &mut leaf);
    out
}

/// `ρ̂ = τ·ĉ_n` with `ĉ_n` a dyadic lower approximation of `2^n/(e·n^n)`.
pub fn rho_for_tau(tau: &Rational, n: usize) -> Rational {
    let c = Rational::from_integer(BigInt::one() << n) / (e_upper() * pow(&qi(n as i64), n as u32));
    tau * dyadic_floor_relative(&c, RHO_SLACK_BITS)
}

fn shell_count(q: usize, n: usize, rho: f64) -> f64 {
    let alpha = rho / (2 * n) as f64;
    if q == 1 {
        (2 * n + 1) as f64
    } else {
        (2.0 * (1.0 + rho) / alpha + 1.0).powi(q as i32)
    }
}

/// Projected number of leaf evaluations for `m` facets in dimension `n`.
pub fn projected_evaluations(m: usize, n: usize, tau: &Rational) -> f64 {
    let rho = to_f64(&rho_for_tau(tau, n));
    let branches = binomial((m + n - 2) as u32, (n - 1) as u32).to_f64().unwrap_or(f64::INFINITY);
    // generic level dimensions n-1, n-2, ..., 1, 1
    let mut levels = 1.0;
    for i in 1..n {
        levels *= shell_count(n - i, n, rho);
    }
    levels *= shell_count(1, n, rho);
    branches * levels
}

/// Smallest dyadic-bisected `τ ∈ (0,1]` whose projected cost fits the budget.
pub fn min_feasible_tau(m: usize, n: usize, budget: f64) -> Option<Rational> {
    let mut hi = Rational::one();
    if projected_evaluations(m, n, &hi) > budget {
        return None;
    }
    let mut lo = Rational::zero();
    for _ in 0..30 {
        let mid = (&lo + &hi) / qi(2);
        if projected_evaluations(m, n, &mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

struct Ctx<'a> {
    z: &'a Zonotope,
    normals: &'a [VecQ],
    n: usize,
    rho: &'a Rational,
}

#[derive(Clone)]
struct Best {
    value: Rational,
    r_index: usize,
    index: Vec<Vec<i64>>,
    w: Vec<VecQ>,
}

struct Walk<'a> {
    ctx: &'a Ctx<'a>,
    r: &'a [usize],
    r_index: usize,
    ws: Vec<VecQ>,
    ts: Vec<Vec<i64>>,
    best: Option<Best>,
    stats: SearchStats,
}

impl Walk<'_> {
    fn descend(&mut self, level: usize, prod: &Rational) {
        let n = self.ctx.n;
        if level == n {
            self.stats.evaluations += 1;
            if self.best.as_ref().is_none_or(|b| *prod < b.value) {
                self.best = Some(Best {
                    value: prod.clone(),
                    r_index: self.r_index,
                    index: self.ts.clone(),
                    w: self.ws.clone(),
                });
            }
            return;
        }
        let mut cons = self.ws.clone();
        if level < n - 1 {
            cons.push(self.ctx.normals[self.r[level]].clone());
        }
        let basis = near_normal_basis(&cons, n);
        if basis.is_empty() {
            self.stats.skipped += 1;
            return;
        }
        self.stats.grids += 1;
        for gp in grid_shell(&basis, self.ctx.rho, n) {
            let f = self.ctx.z.support(&gp.w);
            let next = prod * f;
            self.ws.push(gp.w);
            self.ts.push(gp.index);
            self.descend(level + 1, &next);
            self.ws.pop();
            self.ts.pop();
        }
    }
}

/// Certified search on a polytope scaled to `1 <= S <= 1 + 1/n`.
pub fn structured_search(p: &ScaledPolytope, tau: &Rational, cfg: &SearchConfig) -> Result<CertifiedResult> {
    let start = Instant::now();
    let n = p.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension("search needs n >= 2".into()));
    }
    if !tau.is_positive() || *tau > Rational::one() {
        return Err(Error::OutOfRange(format!("tau = {tau} not in (0, 1]")));
    }
    if !p.is_certified() {
        return Err(Error::OutOfRange("polytope is not scaled to unit surface".into()));
    }
    let poly = &p.polytope;
    let m = poly.num_facets();
    let projected = projected_evaluations(m, n, tau);
    if projected > cfg.budget {
        return Err(Error::BudgetExceeded {
            projected,
            budget: cfg.budget,
            min_tau: min_feasible_tau(m, n, cfg.budget).map(|t| crate::rational::format_rational(&t)),
        });
    }
    let rho = rho_for_tau(tau, n);
    let z = projection_body(poly);
    let ctx = Ctx { z: &z, normals: poly.normals(), n, rho: &rho };
    let choices: Vec<Vec<usize>> = (0..m).combinations_with_replacement(n - 1).collect();

    let run = |(r_index, r): (usize, &Vec<usize>)| {
        let mut walk = Walk {
            ctx: &ctx,
            r,
            r_index,
            ws: Vec::new(),
            ts: Vec::new(),
            best: None,
            stats: SearchStats::default(),
        };
        walk.descend(0, &Rational::one());
        (walk.best, walk.stats)
    };
    let results: Vec<(Option<Best>, SearchStats)> = if cfg.threads <= 1 {
        choices.iter().enumerate().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::OutOfRange(e.to_string()))?;
        pool.install(|| choices.par_iter().enumerate().map(run).collect())
    };

    let mut stats = SearchStats::default();
    let mut best: Option<Best> = None;
    for (b, s) in results {
        stats.grids += s.grids;
        stats.evaluations += s.evaluations;
        stats.skipped += s.skipped;
        if let Some(b) = b {
            if best.as_ref().is_none_or(|cur| b.value < cur.value) {
                best = Some(b);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Degenerate("no complete pseudo frame found".into()))?;
    let vol = pow(&poly.volume(), n as u32 - 1);
    Ok(CertifiedResult {
        lambda_lower: vol / &best.value,
        psi: best.value,
        tau: tau.clone(),
        rho,
        frame: best.w,
        r_choice: choices[best.r_index].clone(),
        grid_index: best.index,
        stats,
        projected,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Multiplicative approximation: with `τ = min(1, νδ)` and `ν` a lower bound
/// on `vol^{n-1}/S^n`, `Λ_lower <= Λ(P) <= (1+δ)Λ_lower`.
pub fn lw_approx(p: &HPolytope, delta: &Rational, nu: &Rational, cfg: &SearchConfig) -> Result<ApproxResult> {
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(Error::OutOfRange(format!("delta = {delta} not in (0, 1)")));
    }
    if !nu.is_positive() {
        return Err(Error::OutOfRange(format!("nu = {nu} must be positive")));
    }
    let iso_lower = p.iso_lower_bound(DEFAULT_SQRT_BITS);
    let mut warnings = Vec::new();
    if *nu > iso_lower {
        warnings.push(format!(
            "nu exceeds the computed isoperimetric lower bound {}; the (1+delta) guarantee is void",
            crate::rational::format_rational(&iso_lower)
        ));
    }
    let tau = std::cmp::min(Rational::one(), nu * delta);
    let scaled = p.scale_to_unit_surface();
    let search = structured_search(&scaled, &tau, cfg)?;
    let lambda_upper = (Rational::one() + delta) * &search.lambda_lower;
    Ok(ApproxResult { search, delta: delta.clone(), nu: nu.clone(), iso_lower, lambda_upper, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;
    use crate::polytope::{cube, from_vertices};
    use crate::rational::{dot, q, vecq};

    fn cfg() -> SearchConfig {
        SearchConfig { threads: 2, budget: DEFAULT_BUDGET }
    }

    #[test]
    fn near_normal_examples() {
        let b = near_normal_basis(&[vecq(&[1, 0, 0])], 3);
        assert_eq!(b.len(), 2);
        assert!(dot(&b[0], &b[1]).is_zero());
        for x in &b {
            let s = norm2(x);
            assert!(s >= qi(1) && s < qi(4));
            assert!(x[0].is_zero());
        }
        let b = near_normal_basis(&[], 2);
        assert_eq!(b.len(), 2);
        assert!(near_normal_basis(&[vecq(&[1, 0]), vecq(&[0, 1])], 2).is_empty());
        let b = near_normal_basis(&[vecq(&[1, 1, 1])], 3);
        assert_eq!(rank(&b), 2);
        assert!(b.iter().all(|x| norm2(x) >= qi(1) && norm2(x) < qi(4)));
    }

    #[test]
    fn one_dimensional_shell() {
        let g = grid_shell(&[vecq(&[1, 0])], &qi(1), 2);
        let ts: Vec<Rational> = g.iter().map(|p| p.w[0].clone()).collect();
        assert_eq!(ts, vec![qi(1), q(5, 4), q(3, 2), q(7, 4), qi(2)]);
    }

    #[test]
    fn shell_norms_and_antipodes() {
        let basis = near_normal_basis(&[vecq(&[1, 2, 2])], 3);
        let rho = q(1, 3);
        let g = grid_shell(&basis, &rho, 3);
        let hi = pow(&(Rational::one() + &rho), 2);
        for p in &g {
            let s = norm2(&p.w);
            assert!(s >= qi(1) && s <= hi);
            assert_eq!(leading_sign(&p.w), 1);
            assert!(dot(&p.w, &vecq(&[1, 2, 2])).is_zero());
        }
        assert!(!g.is_empty());
    }

    #[test]
    fn rho_is_below_real_value() {
        let r = to_f64(&rho_for_tau(&qi(1), 3));
        let exact = 8.0 / (std::f64::consts::E * 27.0);
        assert!(r <= exact && (exact - r) / exact < 1e-11);
    }

    #[test]
    fn square_sandwich() {
        let s = cube(2, 0, 1).scale_to_unit_surface();
        let r = structured_search(&s, &q(1, 10), &cfg()).unwrap();
        assert!(r.psi >= q(1, 16) && r.psi <= q(1, 16) + q(1, 10));
        assert_eq!(&r.lambda_lower * &r.psi, s.polytope.volume());
    }

    #[test]
    fn search_is_thread_independent() {
        let t = from_vertices(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap().scale_to_unit_surface();
        let a = structured_search(&t, &q(1, 4), &SearchConfig { threads: 1, budget: 1e9 }).unwrap();
        let b = structured_search(&t, &q(1, 4), &SearchConfig { threads: 4, budget: 1e9 }).unwrap();
        assert_eq!(a.psi, b.psi);
        assert_eq!(a.frame, b.frame);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn budget_refusal_reports_tau() {
        let s = cube(3, 0, 1).scale_to_unit_surface();
        let e = structured_search(&s, &q(1, 1000), &SearchConfig { threads: 1, budget: 1e8 }).unwrap_err();
        match e {
            Error::BudgetExceeded { min_tau: Some(t), .. } => {
                let t = crate::rational::parse_rational(&t).unwrap();
                assert!(projected_evaluations(6, 3, &t) <= 1e8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn approx_square() {
        let sq = cube(2, 0, 1);
        let r = lw_approx(&sq, &q(1, 2), &q(1, 16), &cfg()).unwrap();
        assert!(r.warnings.is_empty());
        assert!(r.search.lambda_lower >= q(2, 3) && r.search.lambda_lower <= qi(1));
        assert!(r.lambda_upper >= qi(1));
        assert!(lw_approx(&sq, &q(1, 2), &q(1, 8), &cfg()).unwrap().warnings.len() == 1);
        assert!(lw_approx(&sq, &qi(1), &q(1, 16), &cfg()).is_err());
    }
}
