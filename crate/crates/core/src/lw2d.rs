//! Exact planar solvers. A minimal-area enclosing rectangle of a convex
//! polygon has a side parallel to one of its edges, so enumerating edge
//! directions gives the LW-constant of a polygon exactly.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::HPolytope;
use crate::rational::{dot, norm2, pow, qi, serde_q, Rational, VecQ};
use crate::zonotope::Zonotope;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarLw {
    #[serde(with = "serde_q")]
    pub lambda: Rational,
    #[serde(with = "serde_q")]
    pub min_area: Rational,
    pub edge: usize,
    #[serde(with = "serde_q::vec")]
    pub direction: VecQ,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinPerimeter {
    #[serde(with = "serde_q::vec")]
    pub direction: VecQ,
    /// Squared perimeter of the optimal rectangle.
    #[serde(with = "serde_q")]
    pub perimeter_sq: Rational,
    pub perimeter: f64,
}

fn perp(v: &[Rational]) -> VecQ {
    vec![-v[1].clone(), v[0].clone()]
}

/// `max v·x - min v·x` over the points.
pub fn width(points: &[VecQ], v: &[Rational]) -> Rational {
    let mut it = points.iter().map(|p| dot(v, p));
    let first = it.next().unwrap_or_else(Rational::zero);
    let (lo, hi) = it.fold((first.clone(), first), |(lo, hi), x| {
        if x < lo {
            (x, hi)
        } else if x > hi {
            (lo, x)
        } else {
            (lo, hi)
        }
    });
    hi - lo
}

fn edge_directions(p: &HPolytope) -> Result<Vec<VecQ>> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension("planar solver needs n = 2".into()));
    }
    Ok(p.normals().iter().map(|a| perp(a)).collect())
}

/// Area of the enclosing rectangle with sides along `v` and `v^⊥`.
pub fn rect_area(points: &[VecQ], v: &[Rational]) -> Rational {
    width(points, v) * width(points, &perp(v)) / norm2(v)
}

/// `Λ(P) = vol(P) / min-area enclosing rectangle`, exact; ties go to the
/// lowest edge index.
pub fn lw_exact_2d(p: &HPolytope) -> Result<PlanarLw> {
    let dirs = edge_directions(p)?;
    let pts = p.vertices();
    let mut best: Option<(Rational, usize)> = None;
    for (j, v) in dirs.iter().enumerate() {
        let area = rect_area(pts, v);
        if best.as_ref().is_none_or(|(b, _)| area < *b) {
            best = Some((area, j));
        }
    }
    let (min_area, edge) = best.ok_or(Error::Empty)?;
    if min_area.is_zero() {
        return Err(Error::Degenerate("polygon has zero area".into()));
    }
    Ok(PlanarLw { lambda: p.volume() / &min_area, min_area, edge, direction: dirs[edge].clone() })
}

/// Minimal-perimeter enclosing rectangle; the optimum is attained along an
/// edge direction of the difference body, whose edges are the polygon's.
pub fn min_perimeter_rect_2d(p: &HPolytope) -> Result<MinPerimeter> {
    let dirs = edge_directions(p)?;
    let pts = p.vertices();
    let mut best: Option<(Rational, usize)> = None;
    for (j, v) in dirs.iter().enumerate() {
        let s = width(pts, v) + width(pts, &perp(v));
        let val = qi(4) * pow(&s, 2) / norm2(v);
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, j));
        }
    }
    let (perimeter_sq, j) = best.ok_or(Error::Empty)?;
    let perimeter = crate::rational::to_f64(&perimeter_sq).sqrt();
    Ok(MinPerimeter { direction: dirs[j].clone(), perimeter_sq, perimeter })
}

/// Minimal enclosing rectangle of a planar zonogon, exact; candidate sides
/// run along the generators.
pub fn min_rect_zonogon(z: &Zonotope) -> Result<(Rational, VecQ)> {
    if z.n != 2 {
        return Err(Error::UnsupportedDimension("zonogon needs n = 2".into()));
    }
    let mut best: Option<(Rational, VecQ)> = None;
    for g in &z.generators {
        if g.iter().all(Zero::is_zero) {
            continue;
        }
        let area = qi(4) * z.support(g) * z.support(&perp(g)) / norm2(g);
        if best.as_ref().is_none_or(|(b, _)| area < *b) {
            best = Some((area, g.clone()));
        }
    }
    best.ok_or(Error::Degenerate("zonogon has no generators".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{cube, from_vertices, VPolytope};
    use crate::rational::q;
    use crate::zonotope::projection_body;

    fn rhombus(l: Rational) -> HPolytope {
        let z = Rational::zero();
        VPolytope::new(
            2,
            vec![
                vec![qi(1), z.clone()],
                vec![qi(-1), z.clone()],
                vec![z.clone(), l.clone()],
                vec![z, -l],
            ],
        )
        .unwrap()
        .to_h()
        .unwrap()
    }

    #[test]
    fn planar_constants() {
        let tri = from_vertices(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        assert_eq!(lw_exact_2d(&tri).unwrap().lambda, q(1, 2));
        assert_eq!(lw_exact_2d(&cube(2, 0, 1)).unwrap().lambda, qi(1));
        for (l, want) in [(q(1, 4), q(17, 32)), (q(1, 2), q(5, 8)), (q(3, 4), q(25, 32))] {
            assert_eq!(lw_exact_2d(&rhombus(l)).unwrap().lambda, want);
        }
    }

    #[test]
    fn perimeters() {
        let sq = min_perimeter_rect_2d(&cube(2, 0, 1)).unwrap();
        assert_eq!(sq.perimeter_sq, qi(16));
        let r = from_vertices(2, &[&[0, 0], &[2, 0], &[2, 1], &[0, 1]]).unwrap();
        assert_eq!(min_perimeter_rect_2d(&r).unwrap().perimeter_sq, qi(36));
    }

    #[test]
    fn perimeter_matches_angle_sweep() {
        let t = from_vertices(2, &[&[0, 0], &[4, 0], &[0, 3]]).unwrap();
        let best = min_perimeter_rect_2d(&t).unwrap().perimeter;
        let pts = [[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]];
        let mut sweep = f64::INFINITY;
        for k in 0..10_000 {
            let th = std::f64::consts::FRAC_PI_2 * k as f64 / 10_000.0;
            let (c, s) = (th.cos(), th.sin());
            let w = |d: [f64; 2]| {
                let v: Vec<f64> = pts.iter().map(|p| p[0] * d[0] + p[1] * d[1]).collect();
                v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
            };
            sweep = sweep.min(2.0 * (w([c, s]) + w([-s, c])));
        }
        assert!(best <= sweep + 1e-12);
        assert!(sweep - best < 1e-3);
    }

    #[test]
    fn zonogon_rectangle_is_four_psi() {
        let tri = from_vertices(2, &[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        let lw = lw_exact_2d(&tri).unwrap();
        let (area, _) = min_rect_zonogon(&projection_body(&tri)).unwrap();
        assert_eq!(area, qi(4) * lw.min_area);
    }

    #[test]
    fn rejects_3d() {
        assert!(lw_exact_2d(&cube(3, 0, 1)).is_err());
    }
}
