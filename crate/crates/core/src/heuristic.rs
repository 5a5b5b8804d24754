//! Plane-sweep search for good frames and minimal enclosing boxes.
//!
//! Holding all but two directions fixed, the best rotation inside the plane
//! `span(u_i, u_k)` is an exact planar problem: the minimal-area rectangle
//! around the projected body has a side parallel to one of its edges. A
//! sweep applies this to every pair in turn until the objective stalls;
//! several seeded random starts guard against local minima.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{certified_frame_bounds, orthonormalize, random_frame_with, Frame};
use crate::linalg::gram_schmidt;
use crate::lw2d::{lw_exact_2d, min_rect_zonogon};
use crate::planar::{convex_hull, edge_directions, P2};
use crate::polytope::HPolytope;
use crate::rational::{qi, round_dyadic, serde_q, to_f64, Rational, VecQ, DEFAULT_SQRT_BITS};
use crate::zonotope::projection_body;

const ROUND_BITS: u32 = 40;

#[derive(Debug, Clone)]
pub struct HeuristicConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Stop a restart when a full pass improves by less than this fraction.
    pub tolerance: f64,
    pub max_passes: usize,
    pub threads: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            tolerance: 1e-12,
            max_passes: 500,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// A body whose enclosing boxes are being minimized.
pub trait BoxTarget: Sync {
    fn dim(&self) -> usize;
    /// Extent along a unit direction (the quantity multiplied over the frame).
    fn extent(&self, u: &[f64]) -> f64;
    /// Unit directions in the plane `span(a, b)` (coordinates w.r.t. `a, b`)
    /// among which an optimal planar rectangle side is found.
    fn plane_directions(&self, a: &[f64], b: &[f64]) -> Vec<P2>;
}

/// Zonotope `Σ[-g_j, g_j]`; the extent is the support value.
pub struct ZonotopeTarget {
    gens: Vec<Vec<f64>>,
}

impl ZonotopeTarget {
    pub fn new(gens: Vec<Vec<f64>>) -> Self {
        Self { gens }
    }
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BoxTarget for ZonotopeTarget {
    fn dim(&self) -> usize {
        self.gens.first().map_or(0, Vec::len)
    }

    fn extent(&self, u: &[f64]) -> f64 {
        self.gens.iter().map(|g| dotf(g, u).abs()).sum()
    }

    fn plane_directions(&self, a: &[f64], b: &[f64]) -> Vec<P2> {
        self.gens
            .iter()
            .filter_map(|g| {
                let p = [dotf(g, a), dotf(g, b)];
                let l = p[0].hypot(p[1]);
                (l > 0.0).then(|| [p[0] / l, p[1] / l])
            })
            .collect()
    }
}

/// Convex hull of points; the extent is the width.
pub struct PointTarget {
    pts: Vec<Vec<f64>>,
}

impl PointTarget {
    pub fn new(pts: Vec<Vec<f64>>) -> Self {
        Self { pts }
    }
}

impl BoxTarget for PointTarget {
    fn dim(&self) -> usize {
        self.pts.first().map_or(0, Vec::len)
    }

    fn extent(&self, u: &[f64]) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pts {
            let v = dotf(p, u);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }

    fn plane_directions(&self, a: &[f64], b: &[f64]) -> Vec<P2> {
        let proj: Vec<P2> = self.pts.iter().map(|p| [dotf(p, a), dotf(p, b)]).collect();
        edge_directions(&convex_hull(&proj))
    }
}

fn objective<T: BoxTarget + ?Sized>(t: &T, rows: &[Vec<f64>]) -> f64 {
    rows.iter().map(|u| t.extent(u)).product()
}

/// Run plane sweeps from `start` until a pass improves by less than
/// `tolerance` (relative). Returns the final frame and objective value.
pub fn sweep<T: BoxTarget + ?Sized>(t: &T, start: &Frame, tolerance: f64, max_passes: usize) -> (Frame, f64) {
    let n = start.dim();
    let mut rows = start.rows().to_vec();
    let mut value = objective(t, &rows);
    for _ in 0..max_passes {
        let prev = value;
        for i in 0..n {
            for k in i + 1..n {
                let (a, b) = (rows[i].clone(), rows[k].clone());
                let mut best = t.extent(&a) * t.extent(&b);
                let mut choice: Option<(Vec<f64>, Vec<f64>)> = None;
                for d in t.plane_directions(&a, &b) {
                    let na: Vec<f64> = a.iter().zip(&b).map(|(x, y)| d[0] * x + d[1] * y).collect();
                    let nb: Vec<f64> = a.iter().zip(&b).map(|(x, y)| -d[1] * x + d[0] * y).collect();
                    let v = t.extent(&na) * t.extent(&nb);
                    if v < best {
                        best = v;
                        choice = Some((na, nb));
                    }
                }
                if let Some((na, nb)) = choice {
                    rows[i] = na;
                    rows[k] = nb;
                }
            }
        }
        if let Some(o) = orthonormalize(&rows) {
            rows = o;
        }
        value = objective(t, &rows);
        if prev - value <= tolerance * prev {
            break;
        }
    }
    (Frame::new(rows.clone()).unwrap_or_else(|_| Frame::from_rows(&rows).expect("frame")), value)
}

/// Multi-start sweep; restart `r` draws its start from ChaCha stream `r`.
/// Returns the best frame, its value and the restart index.
pub fn multistart<T: BoxTarget + ?Sized>(t: &T, cfg: &HeuristicConfig) -> Result<(Frame, f64, usize)> {
    let n = t.dim();
    let run = |r: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        let start = if r == 0 { Frame::coordinate(n) } else { random_frame_with(n, &mut rng) };
        let (f, v) = sweep(t, &start, cfg.tolerance, cfg.max_passes);
        (f, v, r)
    };
    let restarts = cfg.restarts.max(1);
    let results: Vec<(Frame, f64, usize)> = if cfg.threads <= 1 {
        (0..restarts).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::OutOfRange(e.to_string()))?;
        pool.install(|| (0..restarts).into_par_iter().map(run).collect())
    };
    let mut best: Option<(Frame, f64, usize)> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.1 < b.1) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicResult {
    pub frame: Frame,
    pub psi: f64,
    pub lambda: f64,
    /// Exactly orthogonal rational rounding of `frame`.
    #[serde(with = "serde_q::mat")]
    pub rational_frame: Vec<VecQ>,
    /// Certified `Λ(P; F_rational) >= lambda_lower`.
    #[serde(with = "serde_q")]
    pub lambda_lower: Rational,
    /// Certified `Ψ(P; F_rational) <= psi_upper`.
    #[serde(with = "serde_q")]
    pub psi_upper: Rational,
    pub restart: usize,
}

/// Round a real frame to denominator `2^40` and orthogonalize exactly.
pub fn rational_frame(f: &Frame) -> Vec<VecQ> {
    let rows: Vec<VecQ> = f
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| round_dyadic(*x, ROUND_BITS)).collect())
        .collect();
    gram_schmidt(&rows)
}

/// Minimize `Ψ(P;F)` by plane sweeps over the projection body.
pub fn heuristic_search(p: &HPolytope, cfg: &HeuristicConfig) -> Result<HeuristicResult> {
    let n = p.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension("search needs n >= 2".into()));
    }
    let z = projection_body(p);
    let target = ZonotopeTarget::new(z.generators_f64());
    let (frame, psi, restart) = multistart(&target, cfg)?;
    let vol = to_f64(&p.volume()).powi(n as i32 - 1);
    let rational_frame = rational_frame(&frame);
    if rational_frame.len() != n {
        return Err(Error::NotOrthonormal("rounded frame lost rank".into()));
    }
    let (lambda_lower, psi_upper) = certified_frame_bounds(p, &rational_frame, DEFAULT_SQRT_BITS);
    Ok(HeuristicResult { lambda: vol / psi, psi, frame, rational_frame, lambda_lower, psi_upper, restart })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxMode {
    /// Box around the body itself; reports `Φ = vol / vol(B)`.
    Body,
    /// Box around the projection body; `vol(B) = 2^n Ψ(P;F)`.
    ProjectionBody,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinBoxResult {
    pub mode: BoxMode,
    pub frame: Frame,
    pub box_volume: f64,
    /// `Φ` (body mode) or `Ψ` (projection-body mode) for the found frame.
    pub value: f64,
    /// Exact optimum in the plane.
    #[serde(with = "serde_q::opt")]
    pub exact: Option<Rational>,
}

/// Minimal enclosing box over frames: exact in the plane, plane sweeps otherwise.
pub fn min_box(p: &HPolytope, mode: BoxMode, cfg: &HeuristicConfig) -> Result<MinBoxResult> {
    let n = p.dim();
    let vol = p.volume();
    if n == 2 {
        let (area, dir) = match mode {
            BoxMode::Body => {
                let lw = lw_exact_2d(p)?;
                (lw.min_area, lw.direction)
            }
            BoxMode::ProjectionBody => min_rect_zonogon(&projection_body(p))?,
        };
        let d = [to_f64(&dir[0]), to_f64(&dir[1])];
        let frame = Frame::from_rows(&[d.to_vec(), vec![-d[1], d[0]]])?;
        let exact = match mode {
            BoxMode::Body => &vol / &area,
            BoxMode::ProjectionBody => &area / qi(4),
        };
        return Ok(MinBoxResult { mode, frame, box_volume: to_f64(&area), value: to_f64(&exact), exact: Some(exact) });
    }
    let (frame, box_volume) = match mode {
        BoxMode::Body => multistart(&PointTarget::new(p.to_v().vertices_f64()), cfg)
            .map(|(f, v, _)| (f, v))?,
        BoxMode::ProjectionBody => {
            let z = projection_body(p);
            let (f, v, _) = multistart(&ZonotopeTarget::new(z.generators_f64()), cfg)?;
            (f, v * 2f64.powi(n as i32))
        }
    };
    let value = match mode {
        BoxMode::Body => to_f64(&vol) / box_volume,
        BoxMode::ProjectionBody => box_volume / 2f64.powi(n as i32),
    };
    Ok(MinBoxResult { mode, frame, box_volume, value, exact: None })
}

/// `1/n!`, the lower bound on `Φ`.
pub fn phi_lower_bound(n: usize) -> Rational {
    Rational::new(1.into(), crate::rational::factorial(n as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{cube, from_vertices};
    use crate::rational::q;

    fn quick() -> HeuristicConfig {
        HeuristicConfig { restarts: 8, seed: 1, threads: 2, ..Default::default() }
    }

    #[test]
    fn cube_is_optimal_at_axes() {
        let r = heuristic_search(&cube(3, 0, 1), &quick()).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-9);
        assert!((r.psi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn regular_tetrahedron() {
        let t = from_vertices(3, &[&[1, 1, 1], &[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]]).unwrap();
        let r = heuristic_search(&t, &quick()).unwrap();
        assert!((r.lambda - 2.0 / 9.0).abs() < 1e-6, "{}", r.lambda);
        assert!(r.lambda_lower <= q(2, 9));
        assert!((to_f64(&r.lambda_lower) - 2.0 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn triangle_matches_exact() {
        let t = from_vertices(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        let r = heuristic_search(&t, &quick()).unwrap();
        assert!((r.lambda - 0.5).abs() < 1e-9);
    }

    #[test]
    fn restarts_are_thread_independent() {
        let t = from_vertices(3, &[&[0, 0, 0], &[1, 2, 0], &[1, 0, 4], &[0, 2, 4]]).unwrap();
        let a = heuristic_search(&t, &HeuristicConfig { threads: 1, ..quick() }).unwrap();
        let b = heuristic_search(&t, &HeuristicConfig { threads: 4, ..quick() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn boxes() {
        let tri = from_vertices(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        let b = min_box(&tri, BoxMode::Body, &quick()).unwrap();
        assert_eq!(b.exact, Some(q(1, 2)));
        let c = min_box(&cube(3, -1, 1), BoxMode::Body, &quick()).unwrap();
        assert!((c.value - 1.0).abs() < 1e-9);
        let t = from_vertices(3, &[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap();
        let phi = min_box(&t, BoxMode::Body, &quick()).unwrap().value;
        assert!(phi >= to_f64(&phi_lower_bound(3)));
        let pb = min_box(&cube(3, 0, 1), BoxMode::ProjectionBody, &quick()).unwrap();
        assert!((pb.box_volume - 8.0).abs() < 1e-9);
    }
}
