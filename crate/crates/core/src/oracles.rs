//! Independent oracles and the inequality battery.
//!
//! Entries with exact sides are decided by exact rational comparison; Monte
//! Carlo entries use 3σ thresholds and may come out inconclusive.

use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{lambda_ratio, psi_zonotope, random_frame_with, Frame};
use crate::heuristic::{heuristic_search, HeuristicConfig};
use crate::lw2d::{lw_exact_2d, min_rect_zonogon, width};
use crate::polytope::HPolytope;
use crate::rational::{binomial, factorial, format_rational, norm2, pow, qi, serde_q, to_f64, Rational, VecQ};
use crate::zonotope::{projection_area_rational, projection_body, zhang_check};

pub const LW_TOL: f64 = 1e-9;
pub const SIGMA_LEVEL: f64 = 3.0;

pub fn random_frame(n: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_frame_with(n, &mut rng)
}

/// Smallest `Ψ(P;F)` over `trials` random frames (an upper bound on `Ψ(P)`).
pub fn brute_force_psi(p: &HPolytope, trials: usize, seed: u64) -> (f64, Frame) {
    let z = projection_body(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::INFINITY, Frame::coordinate(p.dim()));
    for _ in 0..trials {
        let f = random_frame_with(p.dim(), &mut rng);
        let v = psi_zonotope(&z, &f).expect("dimension matches");
        if v < best.0 {
            best = (v, f);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Side {
    Exact {
        #[serde(with = "serde_q")]
        value: Rational,
    },
    Real {
        value: f64,
    },
    MonteCarlo {
        value: f64,
        sigma: f64,
    },
}

impl Side {
    pub fn approx(&self) -> f64 {
        match self {
            Side::Exact { value } => to_f64(value),
            Side::Real { value } | Side::MonteCarlo { value, .. } => *value,
        }
    }

    pub fn display(&self) -> String {
        match self {
            Side::Exact { value } => format_rational(value),
            Side::Real { value } => format_real(*value),
            Side::MonteCarlo { value, sigma } => format!("{} ± {}", format_real(*value), format_real(*sigma)),
        }
    }
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub body: String,
    pub relation: String,
    pub lhs: Side,
    pub rhs: Side,
    /// `lhs - rhs`.
    pub slack: Side,
    pub verdict: Verdict,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub entries: Vec<Entry>,
}

impl BoundsReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Holds)
    }

    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }
}

fn exact(v: Rational) -> Side {
    Side::Exact { value: v }
}

fn holds(b: bool) -> Verdict {
    if b {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

fn exact_entry(name: &str, body: &str, relation: &str, lhs: Rational, rhs: Rational, note: String) -> Entry {
    let ok = match relation {
        ">=" => lhs >= rhs,
        ">" => lhs > rhs,
        "<=" => lhs <= rhs,
        "<" => lhs < rhs,
        "==" => lhs == rhs,
        _ => unreachable!("relation {relation}"),
    };
    Entry {
        name: name.into(),
        body: body.into(),
        relation: relation.into(),
        slack: exact(&lhs - &rhs),
        lhs: exact(lhs),
        rhs: exact(rhs),
        verdict: holds(ok),
        note,
    }
}

/// `Λ(P;F) <= 1` over the given frames (tolerance `1e-9`).
pub fn check_lw(p: &HPolytope, frames: &[Frame], body: &str) -> Result<Entry> {
    let mut worst = f64::NEG_INFINITY;
    for f in frames {
        worst = worst.max(lambda_ratio(p, f)?);
    }
    Ok(Entry {
        name: "loomis_whitney".into(),
        body: body.into(),
        relation: "<=".into(),
        lhs: Side::Real { value: worst },
        rhs: exact(Rational::one()),
        slack: Side::Real { value: worst - 1.0 },
        verdict: holds(worst <= 1.0 + LW_TOL),
        note: format!("max over {} frames", frames.len()),
    })
}

/// `vol^{n-1} >= ((n-1)!/n^{n-1}) Π_i vol_{n-1}(P ∩ e_i^⊥)`, exact.
pub fn check_meyer(p: &HPolytope, body: &str) -> Result<Entry> {
    if !p.origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let n = p.dim();
    let c = Rational::new(factorial(n as u32 - 1), pow(&qi(n as i64), n as u32 - 1).to_integer());
    let mut prod = Rational::one();
    for i in 0..n {
        prod *= p.section_volume(i)?;
    }
    let lhs = pow(&p.volume(), n as u32 - 1);
    let rhs = c * prod;
    let note = if lhs == rhs { "equality" } else { "strict" }.to_string();
    Ok(exact_entry("meyer", body, ">=", lhs, rhs, note))
}

/// `binom(2n,n)/(2n)^n`.
pub fn universal_lower_bound(n: usize) -> Rational {
    Rational::new(binomial(2 * n as u32, n as u32), pow(&qi(2 * n as i64), n as u32).to_integer())
}

/// A found LW-constant value: certified (with its `δ`) or heuristic.
#[derive(Debug, Clone)]
pub enum LambdaFound {
    Certified { lambda: Rational, delta: Rational },
    Heuristic(f64),
}

pub fn check_universal_lower_bound(n: usize, found: &LambdaFound, body: &str) -> Entry {
    let bound = universal_lower_bound(n);
    match found {
        LambdaFound::Certified { lambda, delta } => exact_entry(
            "universal_lower_bound",
            body,
            ">=",
            (Rational::one() + delta) * lambda,
            bound,
            "(1+delta)*lambda".into(),
        ),
        LambdaFound::Heuristic(l) => {
            let b = to_f64(&bound);
            Entry {
                name: "universal_lower_bound".into(),
                body: body.into(),
                relation: ">=".into(),
                lhs: Side::Real { value: *l },
                rhs: exact(bound),
                slack: Side::Real { value: l - b },
                verdict: holds(*l >= b - LW_TOL),
                note: "heuristic lambda".into(),
            }
        }
    }
}

/// `(n-1)!/(2^{n-2} n^{n-1})`, the lower bound for simplices.
pub fn simplex_lower_bound(n: usize) -> Rational {
    let num = Rational::from_integer(factorial(n as u32 - 1));
    let den = pow(&qi(2), n as u32 - 2) * pow(&qi(n as i64), n as u32 - 1);
    num / den
}

/// `(n-1)!/n^{n-1}`, attained by the regular simplex.
pub fn simplex_upper_bound(n: usize) -> Rational {
    Rational::from_integer(factorial(n as u32 - 1)) / pow(&qi(n as i64), n as u32 - 1)
}

/// Simplex constants: lower bound strictly below `(1+δ)Λ` and `Λ` at most the
/// regular-simplex value. In the plane every triangle has `Λ = 1/2`.
pub fn check_simplex_bounds(n: usize, found: &LambdaFound, body: &str) -> Vec<Entry> {
    let lo = simplex_lower_bound(n);
    let hi = simplex_upper_bound(n);
    match found {
        LambdaFound::Certified { lambda, delta } => {
            let up = (Rational::one() + delta) * lambda;
            if n == 2 {
                return vec![
                    exact_entry("simplex_lower", body, "<=", lo, up, "(1+delta)*lambda".into()),
                    exact_entry("simplex_upper", body, "<=", lambda.clone(), hi, "lambda".into()),
                ];
            }
            vec![
                exact_entry("simplex_lower", body, "<", lo, up, "(1+delta)*lambda".into()),
                exact_entry("simplex_upper", body, "<=", lambda.clone(), hi, "lambda".into()),
            ]
        }
        LambdaFound::Heuristic(l) => {
            let lo_f = to_f64(&lo);
            let hi_f = to_f64(&hi);
            let lower_ok = if n == 2 { (l - lo_f).abs() <= LW_TOL } else { *l > lo_f };
            vec![
                Entry {
                    name: "simplex_lower".into(),
                    body: body.into(),
                    relation: if n == 2 { "==" } else { "<" }.into(),
                    lhs: exact(lo),
                    rhs: Side::Real { value: *l },
                    slack: Side::Real { value: lo_f - l },
                    verdict: holds(lower_ok),
                    note: "heuristic lambda".into(),
                },
                Entry {
                    name: "simplex_upper".into(),
                    body: body.into(),
                    relation: "<=".into(),
                    lhs: Side::Real { value: *l },
                    rhs: exact(hi),
                    slack: Side::Real { value: l - hi_f },
                    verdict: holds(*l <= hi_f + LW_TOL),
                    note: "heuristic lambda".into(),
                },
            ]
        }
    }
}

/// For exactly orthogonal rational directions, the box around `ΠP` spanned
/// by the frame has volume `2^n Ψ(P;F)`. Compared after clearing the common
/// factor `Π‖w_i‖`: the widths of the sign-sum point set against `2^n Π h(w_i)`.
pub fn check_petty_identity(p: &HPolytope, dirs: &[VecQ], body: &str) -> Result<Entry> {
    let n = p.dim();
    let z = projection_body(p);
    let pts = z.sign_sum_points();
    let lhs: Rational = dirs.iter().map(|w| width(&pts, w)).product();
    let mut rhs = pow(&qi(2), n as u32);
    for w in dirs {
        rhs *= projection_area_rational(p, w)?;
    }
    Ok(exact_entry("petty_box", body, "==", lhs, rhs, "box widths vs 2^n * support product".into()))
}

/// `n·vol(S) = t(v)·‖v‖·vol_{n-1}(S|v^⊥)` (maximal chord times projection),
/// which characterizes simplices; stated exactly as `n·vol = t·A(v)`.
pub fn chord_identity_check(s: &HPolytope, dirs: &[VecQ], body: &str) -> Result<Entry> {
    let n = qi(s.dim() as i64);
    let lhs = &n * s.volume();
    let mut worst: Option<(Rational, Rational)> = None;
    for v in dirs {
        let t = s.longest_chord(v)?;
        let rhs = t * projection_area_rational(s, v)?;
        let dev = (&lhs - &rhs).abs();
        if worst.as_ref().is_none_or(|(d, _)| dev > *d) {
            worst = Some((dev, rhs));
        }
    }
    let (_, rhs) = worst.ok_or_else(|| Error::OutOfRange("no directions".into()))?;
    Ok(exact_entry("chord_identity", body, "==", lhs, rhs, format!("worst of {} directions", dirs.len())))
}

/// Zhang's inequality via Monte Carlo: ratio `>= 1`, with equality exactly
/// for simplices. `expect_equality` selects the two-sided equality test.
pub fn zhang_entry(p: &HPolytope, samples: u64, seed: u64, threads: usize, expect_equality: bool, body: &str) -> Result<Entry> {
    let r = zhang_check(p, samples, seed, threads)?;
    let dev = r.ratio - 1.0;
    let thr = SIGMA_LEVEL * r.ratio_sigma;
    let (relation, verdict) = if expect_equality {
        ("==", holds(dev.abs() <= thr))
    } else if dev > thr {
        (">", Verdict::Holds)
    } else if dev < -thr {
        (">", Verdict::Violated)
    } else {
        (">", Verdict::Inconclusive)
    };
    Ok(Entry {
        name: "zhang".into(),
        body: body.into(),
        relation: relation.into(),
        lhs: Side::MonteCarlo { value: r.ratio, sigma: r.ratio_sigma },
        rhs: exact(Rational::one()),
        slack: Side::MonteCarlo { value: dev, sigma: r.ratio_sigma },
        verdict,
        note: format!("{} samples, seed {seed}", r.polar.samples),
    })
}

/// Whether the polytope is a simplex.
pub fn is_simplex(p: &HPolytope) -> bool {
    p.vertices().len() == p.dim() + 1
}

/// Settings for [`run_battery`].
#[derive(Debug, Clone, Serialize)]
pub struct BatteryConfig {
    /// Random frames for the LW upper bound.
    pub frames: usize,
    /// Monte Carlo samples for the Zhang entry; 0 skips it.
    pub samples: u64,
    pub seed: u64,
    pub threads: usize,
    pub restarts: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            frames: 1000,
            samples: 100_000,
            seed: 0,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            restarts: 32,
        }
    }
}

const PETTY_MAX_GENERATORS: usize = 14;
const CHORD_DIRECTIONS: usize = 16;

/// Small random integer directions, reproducible from the seed.
pub fn random_integer_directions(n: usize, count: usize, seed: u64) -> Vec<VecQ> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
        if v.iter().any(|x| *x != 0) {
            out.push(v.into_iter().map(qi).collect());
        }
    }
    out
}

/// `n·vol = Σ β_j ω_j` after moving an interior point to the origin.
pub fn check_facet_volume_identity(p: &HPolytope, body: &str) -> Result<Entry> {
    let t = p.translate_origin_interior();
    let n = qi(t.dim() as i64);
    let rhs: Rational = t.facet_data()?.iter().map(|f| &f.offset * &f.omega).sum();
    Ok(exact_entry("facet_volume", body, "==", n * t.volume(), rhs, "n*vol vs sum beta_j*omega_j".into()))
}

/// `Σ ω_j a_j = 0`, reported as the squared norm of the sum.
pub fn check_minkowski_balance(p: &HPolytope, body: &str) -> Entry {
    let mut sum = vec![Rational::zero(); p.dim()];
    for (a, w) in p.normals().iter().zip(p.omegas()) {
        for (s, x) in sum.iter_mut().zip(a) {
            *s += w * x;
        }
    }
    exact_entry("minkowski_balance", body, "==", norm2(&sum), Rational::zero(), "|sum omega_j*a_j|^2".into())
}

/// Determinant formula for the projection body against the volume of its
/// vertex hull. `None` when the zonotope has too many generators.
pub fn check_zonotope_volume(p: &HPolytope, body: &str) -> Result<Option<Entry>> {
    let z = projection_body(p);
    let det = match z.volume(false) {
        Ok(v) => v,
        Err(Error::TooExpensive(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let hull = z.to_vpolytope()?.volume()?;
    Ok(Some(exact_entry("zonotope_volume", body, "==", det, hull, "determinant sum vs vertex hull".into())))
}

/// In the plane: `2^2 Ψ(P) = ` minimal rectangle area around `ΠP`, with `Ψ`
/// taken from the exact planar LW solver.
pub fn check_planar_projection_box(p: &HPolytope, body: &str) -> Result<Entry> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension("planar identity needs n = 2".into()));
    }
    let lw = lw_exact_2d(p)?;
    let psi = p.volume() / &lw.lambda;
    let (area, _) = min_rect_zonogon(&projection_body(p))?;
    Ok(exact_entry("planar_projection_box", body, "==", area, qi(4) * psi, "min rectangle around projection body vs 4*psi".into()))
}

/// The full inequality and identity battery for one body. Entries come in a
/// fixed order and do not depend on the thread count.
pub fn run_battery(p: &HPolytope, body: &str, cfg: &BatteryConfig) -> Result<BoundsReport> {
    let n = p.dim();
    let mut report = BoundsReport::default();
    let hcfg = HeuristicConfig { restarts: cfg.restarts, seed: cfg.seed, threads: cfg.threads, ..Default::default() };
    let heur = heuristic_search(p, &hcfg)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut frames: Vec<Frame> = (0..cfg.frames).map(|_| random_frame_with(n, &mut rng)).collect();
    frames.push(heur.frame.clone());
    report.push(check_lw(p, &frames, body)?);

    let found = LambdaFound::Heuristic(heur.lambda);
    report.push(check_universal_lower_bound(n, &found, body));
    if is_simplex(p) {
        report.entries.extend(check_simplex_bounds(n, &found, body));
        let dirs = random_integer_directions(n, CHORD_DIRECTIONS, cfg.seed);
        report.push(chord_identity_check(p, &dirs, body)?);
    }
    if p.origin_interior() {
        report.push(check_meyer(p, body)?);
    }
    report.push(check_facet_volume_identity(p, body)?);
    report.push(check_minkowski_balance(p, body));
    if projection_body(p).generators.len() <= PETTY_MAX_GENERATORS {
        report.push(check_petty_identity(p, &heur.rational_frame, body)?);
    }
    if let Some(e) = check_zonotope_volume(p, body)? {
        report.push(e);
    }
    if n == 2 {
        report.push(check_planar_projection_box(p, body)?);
    }
    if cfg.samples > 0 {
        report.push(zhang_entry(p, cfg.samples, cfg.seed, cfg.threads, is_simplex(p), body)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{coordinate_crosspolytope, cube, from_vertices, standard_simplex};
    use crate::rational::{q, vecq};
    use crate::structured::near_normal_basis;

    fn t3() -> HPolytope {
        from_vertices(3, &[&[1, 1, 1], &[1, -1, -1], &[-1, 1, -1], &[-1, -1, 1]]).unwrap()
    }

    #[test]
    fn random_frames_are_orthonormal_and_reproducible() {
        assert_eq!(random_frame(3, 5), random_frame(3, 5));
        assert!(random_frame(2, 9).orthonormality_defect() < 1e-12);
    }

    #[test]
    fn meyer_cases() {
        let c = coordinate_crosspolytope(&[qi(1), qi(2), qi(3)]);
        let e = check_meyer(&c, "cross").unwrap();
        assert_eq!(e.verdict, Verdict::Holds);
        assert_eq!(e.note, "equality");
        let k = check_meyer(&cube(3, -1, 1), "cube").unwrap();
        assert_eq!(k.lhs, exact(qi(64)));
        assert_eq!(k.rhs, exact(q(2, 9) * qi(64)));
        assert_eq!(k.note, "strict");
        assert_eq!(check_meyer(&cube(3, 0, 1), "c").unwrap_err(), Error::OriginNotInterior);
    }

    #[test]
    fn constants() {
        assert_eq!(universal_lower_bound(2), q(3, 8));
        assert_eq!(universal_lower_bound(3), q(5, 54));
        assert_eq!(simplex_upper_bound(3), q(2, 9));
        assert_eq!(simplex_lower_bound(3), q(1, 9));
        assert!(universal_lower_bound(2) < q(1, 2));
    }

    #[test]
    fn petty_identity_exact() {
        let sq = cube(2, 0, 1);
        let e = check_petty_identity(&sq, &[vecq(&[1, 0]), vecq(&[0, 1])], "square").unwrap();
        assert_eq!(e.lhs, exact(qi(4)));
        assert_eq!(e.verdict, Verdict::Holds);
        let t = t3();
        let mut dirs = near_normal_basis(&[vecq(&[3, -1, 2])], 3);
        dirs.insert(0, vecq(&[3, -1, 2]));
        assert_eq!(check_petty_identity(&t, &dirs, "t3").unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn chord_identity() {
        let s = standard_simplex(3);
        assert_eq!(chord_identity_check(&s, &[vecq(&[1, 0, 0])], "s").unwrap().verdict, Verdict::Holds);
        let c = chord_identity_check(&cube(3, 0, 1), &[vecq(&[1, 0, 0])], "c").unwrap();
        assert_eq!(c.verdict, Verdict::Violated);
        assert_eq!(c.slack, exact(qi(2)));
    }

    #[test]
    fn lw_and_bounds_entries() {
        let frames: Vec<Frame> = (0..50).map(|s| random_frame(3, s)).collect();
        assert_eq!(check_lw(&t3(), &frames, "t3").unwrap().verdict, Verdict::Holds);
        let e = check_universal_lower_bound(2, &LambdaFound::Certified { lambda: q(1, 2), delta: q(1, 10) }, "tri");
        assert_eq!(e.verdict, Verdict::Holds);
        let s = check_simplex_bounds(3, &LambdaFound::Heuristic(2.0 / 9.0), "t3");
        assert!(s.iter().all(|e| e.verdict == Verdict::Holds));
    }

    #[test]
    fn report_round_trip() {
        let mut r = BoundsReport::default();
        r.push(check_meyer(&cube(3, -1, 1), "cube").unwrap());
        r.push(check_lw(&cube(3, 0, 1), &[random_frame(3, 1)], "cube").unwrap());
        let s = serde_json::to_string(&r).unwrap();
        let back: BoundsReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn battery_holds_on_small_bodies() {
        let cfg = BatteryConfig { frames: 50, samples: 20_000, seed: 1, threads: 2, restarts: 4 };
        for (name, p) in [("square", cube(2, -1, 1)), ("t3", t3()), ("simplex2", standard_simplex(2))] {
            let r = run_battery(&p, name, &cfg).unwrap();
            for e in &r.entries {
                assert_eq!(e.verdict, Verdict::Holds, "{name}: {e:?}");
            }
            assert!(r.entries.iter().any(|e| e.name == "facet_volume"));
        }
    }

    #[test]
    fn battery_is_thread_independent() {
        let p = t3();
        let a = run_battery(&p, "t3", &BatteryConfig { frames: 20, samples: 5000, seed: 3, threads: 1, restarts: 3 }).unwrap();
        let b = run_battery(&p, "t3", &BatteryConfig { frames: 20, samples: 5000, seed: 3, threads: 4, restarts: 3 }).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn identities_fail_where_they_should() {
        let c = cube(3, -1, 1);
        let e = chord_identity_check(&c, &[vecq(&[1, 0, 0])], "cube").unwrap();
        assert_eq!(e.verdict, Verdict::Violated);
        assert!(check_planar_projection_box(&c, "cube").is_err());
    }
}
