use revlw::frame::lambda_ratio;
use revlw::heuristic::{heuristic_search, min_box, phi_lower_bound, BoxMode, HeuristicConfig};
use revlw::lw2d::lw_exact_2d;
use revlw::rational::{q, qi, to_f64};
use revlw::structured::{lw_approx, min_feasible_tau, projected_evaluations, structured_search, SearchConfig};
use revlw::{zoo, Error, Rational};

fn hcfg() -> HeuristicConfig {
    HeuristicConfig { restarts: 16, seed: 1, ..Default::default() }
}

fn scfg() -> SearchConfig {
    SearchConfig { threads: 4, budget: 1e8 }
}

/// The certified value exceeds the optimum by at most `τ`, and the heuristic
/// value is an upper bound on the optimum.
#[test]
fn certified_and_heuristic_are_consistent() {
    for (name, tau) in [("square", q(1, 10)), ("triangle", q(1, 10)), ("rhombus_1_2", q(1, 10)), ("regular_tetrahedron", qi(1))] {
        let p = zoo::body(name).unwrap().scale_to_unit_surface();
        let c = structured_search(&p, &tau, &scfg()).unwrap();
        let h = heuristic_search(&p.polytope, &hcfg()).unwrap();
        let slack = to_f64(&(&c.psi - &tau));
        assert!(slack <= h.psi + 1e-12, "{name}: psi - tau = {slack}, heuristic {}", h.psi);
    }
}

#[test]
fn approximation_brackets_planar_constants() {
    for name in ["square", "triangle", "rhombus_1_4", "rhombus_3_4"] {
        let p = zoo::body(name).unwrap();
        let exact = lw_exact_2d(&p).unwrap().lambda;
        let nu = p.iso_lower_bound(60);
        for delta in [q(1, 2), q(1, 8), q(1, 32)] {
            let a = lw_approx(&p, &delta, &nu, &scfg()).unwrap();
            assert!(a.warnings.is_empty());
            assert!(a.search.lambda_lower <= exact, "{name} delta {delta}");
            assert!(exact <= a.lambda_upper, "{name} delta {delta}");
        }
    }
}

#[test]
fn optimistic_nu_is_flagged() {
    let p = zoo::body("square").unwrap();
    let a = lw_approx(&p, &q(1, 2), &qi(1), &scfg()).unwrap();
    assert_eq!(a.warnings.len(), 1);
}

#[test]
fn budget_refusal_reports_a_feasible_tau() {
    let p = zoo::body("cube").unwrap().scale_to_unit_surface();
    let cfg = SearchConfig { threads: 2, budget: 1e8 };
    match structured_search(&p, &q(1, 100), &cfg) {
        Err(Error::BudgetExceeded { projected, budget, min_tau }) => {
            assert!(projected > budget);
            let t = revlw::rational::parse_rational(&min_tau.expect("some tau fits")).unwrap();
            assert!(projected_evaluations(6, 3, &t) <= 1e8);
            assert_eq!(min_feasible_tau(6, 3, 1e8), Some(t));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn parameters_out_of_range() {
    let p = zoo::body("square").unwrap();
    let s = p.scale_to_unit_surface();
    assert!(matches!(structured_search(&s, &qi(2), &scfg()), Err(Error::OutOfRange(_))));
    assert!(matches!(structured_search(&s, &qi(0), &scfg()), Err(Error::OutOfRange(_))));
    assert!(matches!(lw_approx(&p, &qi(1), &q(1, 16), &scfg()), Err(Error::OutOfRange(_))));
    let unscaled = revlw::ScaledPolytope { sigma: qi(1), surface: revlw::Enclosure::exact(qi(4)), polytope: p };
    assert!(structured_search(&unscaled, &q(1, 10), &scfg()).is_err());
}

/// For the frame of any enclosing box, `Λ(P;F) >= (vol P / vol B)^{n-1}`,
/// and the best box satisfies `Φ >= 1/n!`.
#[test]
fn box_ratio_bounds() {
    for (name, p) in zoo::all() {
        let n = p.dim();
        let r = min_box(&p, BoxMode::Body, &hcfg()).unwrap();
        let phi = r.value;
        assert!(phi >= to_f64(&phi_lower_bound(n)) - 1e-12, "{name}: {phi}");
        let lam = lambda_ratio(&p, &r.frame).unwrap();
        assert!(lam >= phi.powi(n as i32 - 1) * (1.0 - 1e-9), "{name}: {lam} vs {phi}");
        let pb = min_box(&p, BoxMode::ProjectionBody, &hcfg()).unwrap();
        let h = heuristic_search(&p, &hcfg()).unwrap();
        assert!((pb.value - h.psi).abs() <= 1e-6 * h.psi, "{name}: {} vs {}", pb.value, h.psi);
        if n == 2 {
            let exact: Rational = r.exact.unwrap();
            assert_eq!(exact, p.volume() / lw_exact_2d(&p).unwrap().min_area);
        }
    }
}
