mod common;

use common::{conic_lp, random_lp, simplex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svcplan::conic::{solve, solve_with_fixings, Cone, ConicProgram, ProgramBuilder, SolveStatus, SolverSettings};
use svcplan::{Program, Settings};

fn settings() -> Settings {
    SolverSettings::default()
}

#[test]
fn bound_active_lp() {
    // min x s.t. x ≥ 1
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_var(Cone::Free);
    b.set_cost(x, 1.0);
    b.add_ge(&[(x, 1.0)], 1.0);
    let sol = solve(&b.build(1).unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.x[0] - 1.0).abs() < 1e-8);
    assert!((sol.objective - 1.0).abs() < 1e-8);
}

#[test]
fn second_order_norm() {
    // min t s.t. (t, 3, 4) ∈ SOC
    let mut b = ProgramBuilder::<f64>::new();
    let t = b.add_cone(Cone::SecondOrder, 3);
    b.set_cost(t, 1.0);
    b.add_eq(&[(t + 1, 1.0)], 3.0);
    b.add_eq(&[(t + 2, 1.0)], 4.0);
    let sol = solve(&b.build(3).unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective - 5.0).abs() < 1e-8, "{}", sol.objective);
}

#[test]
fn rotated_cone() {
    // min u s.t. 2uv ≥ w², v = 1, w = 2
    let mut b = ProgramBuilder::<f64>::new();
    let u = b.add_cone(Cone::RotatedSecondOrder, 3);
    b.set_cost(u, 1.0);
    b.add_eq(&[(u + 1, 1.0)], 1.0);
    b.add_eq(&[(u + 2, 1.0)], 2.0);
    let sol = solve(&b.build(3).unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective - 2.0).abs() < 1e-8, "{}", sol.objective);
}

#[test]
fn rotated_cone_with_fixed_members() {
    let mut b = ProgramBuilder::<f64>::new();
    let u = b.add_cone(Cone::RotatedSecondOrder, 3);
    b.set_cost(u, 1.0);
    b.set_bounds(u + 1, 0.5, 0.5);
    b.set_bounds(u + 2, 1.0, 1.0);
    let sol = solve(&b.build(3).unwrap(), &settings()).unwrap();
    assert!((sol.objective - 1.0).abs() < 1e-8, "{}", sol.objective);
}

// Stationarity c + Aᵀy − z − λl + λu as a vector.
fn stationarity(p: &Program, sol: &svcplan::Solution, with_cost: bool) -> Vec<f64> {
    let mut r: Vec<f64> = if with_cost { p.objective().to_vec() } else { vec![0.0; p.n_vars()] };
    for &(i, j, a) in p.equalities() {
        r[j] += a * sol.y[i];
    }
    for j in 0..p.n_vars() {
        r[j] -= sol.dual_cone[j] + sol.lower_dual[j] - sol.upper_dual[j];
    }
    r
}

#[test]
fn optimal_duals_satisfy_kkt() {
    // min x + 2y + t s.t. x + y = 2, x ≤ 1.5, (t, x − 1, y) ∈ SOC, x, y free
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_var(Cone::Free);
    let y = b.add_var(Cone::Free);
    let c = b.add_cone(Cone::SecondOrder, 3);
    b.set_cost(x, 1.0);
    b.set_cost(y, 2.0);
    b.set_cost(c, 1.0);
    b.set_bounds(x, f64::NEG_INFINITY, 1.5);
    b.add_eq(&[(x, 1.0), (y, 1.0)], 2.0);
    b.add_eq(&[(c + 1, 1.0), (x, -1.0)], -1.0);
    b.add_eq(&[(c + 2, 1.0), (y, -1.0)], 0.0);
    let p = b.build(2).unwrap();
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let worst = stationarity(&p, &sol, true).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    assert!(worst < 1e-7, "stationarity {worst}");
    assert!(sol.objective >= sol.dual_objective - 1e-7);
    assert!(sol.residuals.max_violation <= 1e-8);
    assert!(sol.residuals.primal_feas <= 1e-8 && sol.residuals.dual_feas <= 1e-8);
    assert!(sol.lower_dual.iter().chain(&sol.upper_dual).all(|&d| d >= -1e-9));
}

#[test]
fn infeasible_program_carries_farkas_ray() {
    // x1, x2 ≥ 0 with x1 + x2 = −1
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_vars(Cone::Nonnegative, 2);
    b.set_cost(x, 1.0);
    b.add_eq(&[(x, 1.0), (x + 1, 1.0)], -1.0);
    let p = b.build(2).unwrap();
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
    let r = stationarity(&p, &sol, false);
    assert!(r.iter().all(|v| v.abs() < 1e-7), "{r:?}");
    let by: f64 = p.rhs().iter().zip(&sol.y).map(|(b, y)| b * y).sum();
    assert!(by < 0.0);
    assert!(sol.dual_cone.iter().all(|&z| z >= -1e-9));
}

#[test]
fn contradictory_fixings_are_infeasible() {
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_var(Cone::Free);
    b.set_bounds(x, 1.0, 1.0);
    b.add_eq(&[(x, 1.0)], 2.0);
    let sol = solve(&b.build(1).unwrap(), &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn unbounded_program_carries_ray() {
    // min −x − y s.t. x − y = 0, x, y ≥ 0
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_vars(Cone::Nonnegative, 2);
    b.set_cost(x, -1.0);
    b.set_cost(x + 1, -1.0);
    b.add_eq(&[(x, 1.0), (x + 1, -1.0)], 0.0);
    let p = b.build(2).unwrap();
    let sol = solve(&p, &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Unbounded);
    let cx: f64 = p.objective().iter().zip(&sol.x).map(|(c, x)| c * x).sum();
    assert!(cx < 0.0);
    let ax = p.eq_residual(&sol.x);
    let rhs = p.rhs()[0];
    assert!((ax[0] + rhs).abs() < 1e-7 * sol.x.iter().fold(1.0f64, |m, v| m.max(v.abs())));
}

#[test]
fn fixing_a_continuous_variable_is_rejected() {
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_var(Cone::Free);
    b.set_cost(x, 1.0);
    b.add_ge(&[(x, 1.0)], 0.0);
    let p = b.build(1).unwrap();
    let fix = [(0usize, true)].into_iter().collect();
    assert!(solve_with_fixings(&p, &fix, &settings()).is_err());
}

#[test]
fn fixing_an_integral_relaxation_keeps_its_objective() {
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_var(Cone::Free);
    b.set_binary(x);
    b.set_cost(x, -1.0);
    let p = b.build(1).unwrap();
    let relaxed = solve(&p, &settings()).unwrap();
    let fix = [(x, relaxed.x[x] > 0.5)].into_iter().collect();
    let fixed = solve_with_fixings(&p, &fix, &settings()).unwrap();
    assert!((relaxed.objective - fixed.objective).abs() < 1e-8);
}

#[test]
fn iteration_log_is_csv() {
    let mut b = ProgramBuilder::<f64>::new();
    let t = b.add_cone(Cone::SecondOrder, 3);
    b.set_cost(t, 1.0);
    b.add_eq(&[(t + 1, 1.0)], 3.0);
    b.add_eq(&[(t + 2, 1.0)], 4.0);
    let sol = solve(&b.build(3).unwrap(), &settings()).unwrap();
    let mut buf = Vec::new();
    sol.write_log(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("iteration,"));
    assert_eq!(text.lines().count(), sol.log.len() + 1);
    assert!(!sol.log.is_empty());
}

#[test]
fn simplex_oracle_on_known_lp() {
    // min −x1 − 2x2, x1 + x2 + s1 = 4, x2 + s2 = 3 → x = (1, 3), −7
    let a = vec![vec![1.0, 1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]];
    assert!((simplex(&a, &[4.0, 3.0], &[-1.0, -2.0, 0.0, 0.0]).unwrap() + 7.0).abs() < 1e-12);
}

#[test]
fn random_lps_match_dense_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for k in 0..100 {
        let (a, b, c) = random_lp(&mut rng);
        let want = simplex(&a, &b, &c).expect("feasible by construction");
        let sol = solve(&conic_lp(&a, &b, &c), &settings()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "LP {k}");
        assert!((sol.objective - want).abs() <= 1e-6 * (1.0 + want.abs()), "LP {k}: {} vs {want}", sol.objective);
    }
}

// min cᵀx s.t. ‖x − x0‖ ≤ r: unique argmin x0 − r·c/‖c‖.
fn ball_program(c: &[f64], x0: &[f64], r: f64) -> ConicProgram<f64> {
    let n = c.len();
    let mut b = ProgramBuilder::<f64>::new();
    let x = b.add_vars(Cone::Free, n);
    let t = b.add_cone(Cone::SecondOrder, n + 1);
    for j in 0..n {
        b.set_cost(x + j, c[j]);
        b.add_eq(&[(t + 1 + j, 1.0), (x + j, -1.0)], -x0[j]);
    }
    b.set_bounds(t, r, r);
    b.build(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ball_argmin_is_analytic_and_scale_invariant(
        c in prop::collection::vec(-2.0f64..2.0, 2..6),
        shift in -1.0f64..1.0,
        r in 0.2f64..3.0,
        k in 0.1f64..10.0,
    ) {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let x0: Vec<f64> = (0..c.len()).map(|j| shift * j as f64).collect();
        let p = ball_program(&c, &x0, r);
        let base = solve(&p, &settings()).unwrap();
        prop_assert_eq!(base.status, SolveStatus::Optimal);
        for j in 0..c.len() {
            prop_assert!((base.x[j] - (x0[j] - r * c[j] / norm)).abs() < 1e-6);
        }
        let scaled = p.with_objective(p.objective().iter().map(|v| k * v).collect()).unwrap();
        let s = solve(&scaled, &settings()).unwrap();
        for j in 0..c.len() {
            prop_assert!((base.x[j] - s.x[j]).abs() < 1e-6, "scale {k}: {} vs {}", base.x[j], s.x[j]);
        }
    }

    #[test]
    fn solves_are_deterministic(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = random_lp(&mut rng);
        let p = conic_lp(&a, &b, &c);
        let one = solve(&p, &settings()).unwrap();
        let two = solve(&p, &settings()).unwrap();
        prop_assert_eq!(one.log, two.log);
        prop_assert_eq!(one.x, two.x);
    }

    #[test]
    fn optimal_points_respect_tolerances(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = random_lp(&mut rng);
        let sol = solve(&conic_lp(&a, &b, &c), &settings()).unwrap();
        prop_assert_eq!(sol.status, SolveStatus::Optimal);
        let s = settings();
        prop_assert!(sol.residuals.primal_feas <= s.feas_tol);
        prop_assert!(sol.residuals.dual_feas <= s.feas_tol);
        prop_assert!(sol.residuals.rel_gap <= s.gap_tol);
        prop_assert!(sol.x.iter().all(|&v| v >= -s.feas_tol));
        prop_assert!(sol.objective >= sol.dual_objective - 1e-7 * (1.0 + sol.objective.abs()));
    }
}
