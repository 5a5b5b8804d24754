use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use revlw::frame::{lambda_ratio, lambda_squared_rational};
use revlw::linalg::{gram_schmidt, rank};
use revlw::oracles::{check_facet_volume_identity, check_lw, check_minkowski_balance, random_frame, Verdict};
use revlw::polytope::{h_to_v, v_to_h};
use revlw::rational::{dot, norm2, pow, q, qi, vec_to_f64};
use revlw::structured::{grid_shell, near_normal_basis};
use revlw::zonotope::{projection_area, projection_body, projection_hull_oracle};
use revlw::{DirectionR, HPolytope, Rational, VPolytope, VecQ};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn int_points(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, n), n + 1..n + 7)
}

fn to_q(pts: &[Vec<i64>]) -> Vec<VecQ> {
    pts.iter().map(|p| p.iter().map(|&x| qi(x)).collect()).collect()
}

fn polytope(pts: &[Vec<i64>]) -> Option<(VPolytope, HPolytope)> {
    let v = VPolytope::new(pts[0].len(), to_q(pts)).ok()?;
    let h = v.to_h().ok()?;
    Some((v, h))
}

fn sorted(mut v: Vec<VecQ>) -> Vec<VecQ> {
    v.sort();
    v
}

/// Rational rotation `(I - S)(I + S)^{-1}` from a skew matrix with entries
/// `a, b, c`, in closed form.
fn cayley(a: i64, b: i64, c: i64) -> Vec<VecQ> {
    let (a, b, c) = (qi(a), qi(b), qi(c));
    let d = qi(1) + &a * &a + &b * &b + &c * &c;
    let m = [
        [qi(1) + &a * &a - &b * &b - &c * &c, qi(2) * (&a * &b - &c), qi(2) * (&a * &c + &b)],
        [qi(2) * (&a * &b + &c), qi(1) - &a * &a + &b * &b - &c * &c, qi(2) * (&b * &c - &a)],
        [qi(2) * (&a * &c - &b), qi(2) * (&b * &c + &a), qi(1) - &a * &a - &b * &b + &c * &c],
    ];
    m.iter().map(|r| r.iter().map(|x| x / &d).collect()).collect()
}

fn apply(m: &[VecQ], x: &[Rational]) -> VecQ {
    m.iter().map(|r| dot(r, x)).collect()
}

fn orthogonal_dirs(seed: &[Vec<i64>]) -> Option<Vec<VecQ>> {
    let g = gram_schmidt(&to_q(seed));
    (g.len() == seed.len()).then_some(g)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn volume_does_not_depend_on_apex(pts in int_points(3)) {
        if let Some((v, _)) = polytope(&pts) {
            let vol = v.volume().unwrap();
            for i in 0..v.vertices().len() {
                prop_assert_eq!(v.volume_with_apex(i).unwrap(), vol.clone());
            }
        }
    }

    #[test]
    fn facet_identities(pts in int_points(3)) {
        if let Some((_, h)) = polytope(&pts) {
            prop_assert_eq!(check_facet_volume_identity(&h, "p").unwrap().verdict, Verdict::Holds);
            prop_assert_eq!(check_minkowski_balance(&h, "p").verdict, Verdict::Holds);
        }
    }

    #[test]
    fn representation_round_trip(pts in int_points(3)) {
        if let Some((v, h)) = polytope(&pts) {
            let back = h_to_v(&v_to_h(&v).unwrap());
            prop_assert_eq!(sorted(back.vertices().to_vec()), sorted(v.vertices().to_vec()));
            prop_assert_eq!(h.volume(), v.volume().unwrap());
        }
    }

    #[test]
    fn scale_laws(pts in int_points(3), num in 1i64..7, den in 1i64..7) {
        if let Some((_, h)) = polytope(&pts) {
            let s = q(num, den);
            let hs = h.scaled(&s);
            prop_assert_eq!(hs.volume(), h.volume() * pow(&s, 3));
            let w: Rational = h.omegas().iter().sum();
            let ws: Rational = hs.omegas().iter().sum();
            prop_assert_eq!(ws, w * pow(&s, 2));
        }
    }

    #[test]
    fn zonotope_support_is_even_and_homogeneous(pts in int_points(3), x in prop::collection::vec(-9i64..=9, 3), c in -5i64..=5) {
        if let Some((_, h)) = polytope(&pts) {
            let z = projection_body(&h);
            let x: VecQ = x.into_iter().map(qi).collect();
            let neg: VecQ = x.iter().map(|v| -v).collect();
            prop_assert_eq!(z.support(&neg), z.support(&x));
            let cx: VecQ = x.iter().map(|v| v * qi(c)).collect();
            prop_assert_eq!(z.support(&cx), z.support(&x) * qi(c).abs());
        }
    }

    #[test]
    fn projection_routes_agree(pts in int_points(3), seed in 0u64..10_000) {
        if let Some((v, h)) = polytope(&pts) {
            let u = DirectionR::from_unit(&random_frame(3, seed).rows()[0]).unwrap();
            let a = projection_area(&h, &u).unwrap();
            let b = projection_hull_oracle(&v, &u).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn near_normal_basis_properties(cs in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 0..3)) {
        let cs = to_q(&cs);
        let b = near_normal_basis(&cs, 4);
        prop_assert_eq!(b.len(), 4 - rank(&cs));
        for (i, x) in b.iter().enumerate() {
            let s = norm2(x);
            prop_assert!(s >= qi(1) && s < qi(4));
            for c in &cs {
                prop_assert!(dot(x, c).is_zero());
            }
            for y in &b[..i] {
                prop_assert!(dot(x, y).is_zero());
            }
        }
    }

    #[test]
    fn lw_upper_bound_on_random_bodies(pts in int_points(3), seed in 0u64..1000) {
        if let Some((_, h)) = polytope(&pts) {
            let frames: Vec<_> = (0..20).map(|k| random_frame(3, seed * 100 + k)).collect();
            prop_assert_eq!(check_lw(&h, &frames, "p").unwrap().verdict, Verdict::Holds);
        }
    }

    #[test]
    fn rotation_equivariance(pts in int_points(3), a in -3i64..=3, b in -3i64..=3, c in -3i64..=3,
                             d in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 3)) {
        let (Some((_, h)), Some(dirs)) = (polytope(&pts), orthogonal_dirs(&d)) else { return Ok(()) };
        let m = cayley(a, b, c);
        let rotated = h.transformed(&m).unwrap();
        prop_assert_eq!(rotated.volume(), h.volume());
        let rdirs: Vec<VecQ> = dirs.iter().map(|w| apply(&m, w)).collect();
        prop_assert_eq!(
            lambda_squared_rational(&rotated, &rdirs).unwrap(),
            lambda_squared_rational(&h, &dirs).unwrap()
        );
    }

    #[test]
    fn lambda_is_scale_invariant(pts in int_points(3), num in 1i64..9, den in 1i64..9,
                                 d in prop::collection::vec(prop::collection::vec(-4i64..=4, 3), 3)) {
        let (Some((_, h)), Some(dirs)) = (polytope(&pts), orthogonal_dirs(&d)) else { return Ok(()) };
        let hs = h.scaled(&q(num, den));
        prop_assert_eq!(lambda_squared_rational(&hs, &dirs).unwrap(), lambda_squared_rational(&h, &dirs).unwrap());
        let f = revlw::Frame::from_rows(&dirs.iter().map(|w| vec_to_f64(w)).collect::<Vec<_>>()).unwrap();
        let l = lambda_ratio(&h, &f).unwrap();
        prop_assert!(l > 0.0 && l <= 1.0 + 1e-9);
    }
}

#[test]
fn random_frames_are_orthonormal() {
    for seed in 0..10_000 {
        for n in [2, 3, 4] {
            assert!(random_frame(n, seed).orthonormality_defect() <= 1e-12, "n = {n}, seed = {seed}");
        }
    }
}

/// Every unit vector of the span lies within `ρ` of a shell point up to sign.
#[test]
fn grid_shell_covers_the_sphere() {
    let rho = q(1, 2);
    let rho_f = 0.5;
    for constraints in [vec![], vec![vec![qi(1), qi(2), qi(2)]]] {
        let basis = near_normal_basis(&constraints, 3);
        let shell: Vec<Vec<f64>> = grid_shell(&basis, &rho, 3).iter().map(|g| vec_to_f64(&g.w)).collect();
        assert!(!shell.is_empty());
        let basis_f: Vec<Vec<f64>> = basis
            .iter()
            .map(|x| {
                let v = vec_to_f64(x);
                let s = v.iter().map(|t| t * t).sum::<f64>().sqrt();
                v.iter().map(|t| t / s).collect()
            })
            .collect();
        for seed in 0..1000 {
            let g = random_frame(3, seed);
            let coeffs = &g.rows()[0][..basis_f.len()];
            let norm = coeffs.iter().map(|t| t * t).sum::<f64>().sqrt();
            let u: Vec<f64> = (0..3).map(|i| basis_f.iter().zip(coeffs).map(|(b, c)| b[i] * c / norm).sum()).collect();
            let best = shell
                .iter()
                .map(|w| {
                    let d1: f64 = w.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum();
                    let d2: f64 = w.iter().zip(&u).map(|(a, b)| (a + b).powi(2)).sum();
                    d1.min(d2).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best <= rho_f + 1e-12, "distance {best} at seed {seed}");
        }
    }
}

#[test]
fn cayley_matrices_are_orthogonal() {
    let m = cayley(1, -2, 3);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { Rational::one() } else { Rational::zero() };
            assert_eq!(dot(&m[i], &m[j]), want);
        }
    }
}
