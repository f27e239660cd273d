use cgm_core::geometry::{proj_v, project_simplex, VelocityPolytope};
use cgm_core::linalg::{self, dot};
use cgm_core::metrics::{rate_fit, GapEvaluator};
use cgm_core::problems::{make_forsaken, make_matrix_game_quadratic, make_matrix_game_simplex};
use cgm_core::qp::{solve_direction_generic, solve_direction_single, tolerance, QpMethod, QpOptions};
use cgm_core::solver::StartPoint;
use cgm_core::{cgm_run, simplex_cgm_run, Averaging, Error, SolverConfig};
use proptest::prelude::*;

fn restricted_mask(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    (prop::collection::vec(-3.0..3.0f64, d), prop::collection::vec(any::<bool>(), d)).prop_map(|(q, m)| {
        let mut r: Vec<usize> = m.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect();
        if r.is_empty() {
            r.push(0);
        }
        (q, r)
    })
}

proptest! {
    #[test]
    fn proj_v_output_is_feasible_and_stationary((q, r) in (2usize..12).prop_flat_map(restricted_mask)) {
        let p = proj_v(&q, &r);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for &i in &r {
            prop_assert!(p[i] >= 0.0);
        }
        // p − q is a common shift λ on every coordinate the projection leaves
        // unclamped, and clamped coordinates sit at 0 with q_i + λ ≤ 0
        let free: Vec<usize> = (0..q.len()).filter(|i| !r.contains(i) || p[*i] > 0.0).collect();
        prop_assert!(!free.is_empty());
        let lambda = p[free[0]] - q[free[0]];
        for &i in &free {
            prop_assert!((p[i] - q[i] - lambda).abs() < 1e-12);
        }
        for &i in &r {
            if p[i] == 0.0 {
                prop_assert!(q[i] + lambda <= 1e-12);
            }
        }
    }

    #[test]
    fn active_set_and_dual_gradient_agree(
        rows in prop::collection::vec((prop::collection::vec(-1.0..1.0f64, 4), -1.0..1.0f64), 1..4),
        fx in prop::collection::vec(-2.0..2.0f64, 4),
    ) {
        // g ≤ 0 on every row keeps v = 0 feasible
        let rows: Vec<(Vec<f64>, f64)> = rows.into_iter().map(|(n, g)| (n, -g.abs())).collect();
        let poly = VelocityPolytope::from_rows(4, 1.0, &rows).unwrap();
        let eps = 1e-8;
        let tol = tolerance(&poly, &fx);
        let exact = QpOptions { method: QpMethod::ActiveSet, ..QpOptions::default() };
        let iterative = QpOptions { method: QpMethod::DualProjectedGradient, ..QpOptions::default() };
        let a = solve_direction_generic(&poly, &fx, eps, &exact).unwrap();
        let b = solve_direction_generic(&poly, &fx, eps, &iterative).unwrap();
        // Δ ≤ ε/2 up to round-off that scales with the multipliers
        for r in [&a, &b] {
            let slack = tol * (1.0 + r.dual.iter().sum::<f64>());
            prop_assert!(r.delta <= eps / 2.0 + slack, "{:?}: Δ = {:e}", r.solver, r.delta);
            prop_assert!(poly.max_violation(&r.v) <= tol);
        }
        // both are within √ε-ish of the unique minimizer of a 1-strongly convex objective
        prop_assert!(linalg::max_abs_diff(&a.v, &b.v) <= 1e-4, "{:?} vs {:?}", a.v, b.v);
    }

    #[test]
    fn closed_form_matches_generic_solver(
        grad in prop::collection::vec(-2.0..2.0f64, 3),
        g in -1.0..1.0f64,
        fx in prop::collection::vec(-2.0..2.0f64, 3),
        alpha in 0.1..10.0f64,
    ) {
        prop_assume!(linalg::norm(&grad) > 1e-3);
        let closed = solve_direction_single(g, &grad, &fx, alpha).unwrap();
        let poly = VelocityPolytope::from_rows(3, alpha, &[(grad.clone(), g)]).unwrap();
        let generic = solve_direction_generic(&poly, &fx, 1e-12, &QpOptions::default()).unwrap();
        if g >= 0.0 {
            prop_assert!(linalg::max_abs_diff(&closed.v, &generic.v) < 1e-8);
            prop_assert!(alpha * g + dot(&grad, &closed.v) <= 1e-9);
        }
    }
}

#[test]
fn simplex_projection_of_a_point_inside_is_identity() {
    let p = [0.2, 0.3, 0.5];
    assert_eq!(project_simplex(&p), p.to_vec());
}

#[test]
fn quadratic_game_run_reduces_gap_and_reaches_feasibility() {
    let problem = make_matrix_game_quadratic(10, 3).unwrap();
    let mut config = SolverConfig::new(500, 0.01, 10.0);
    config.start = StartPoint::Gaussian;
    config.seed = 4;
    let trace = cgm_run(&problem, &config).unwrap();
    assert_eq!(trace.len(), 500);
    assert!(trace.max_update_residual() < 1e-12);

    let gap = GapEvaluator::for_problem(&problem).unwrap();
    let start = gap.gap(&problem, &trace.records[0].x).unwrap();
    let end = gap.gap(&problem, &trace.output).unwrap();
    assert!(end < 0.5 * start, "{start} -> {end}");
    assert!(problem.feasibility(&trace.final_iterate) < 1e-6);

    // the uniform average matches its definition over x_0..x_{T−1}
    let mut mean = vec![0.0; problem.dim()];
    for r in &trace.records {
        linalg::axpy(1.0 / 500.0, &r.x, &mut mean);
    }
    assert!(linalg::max_abs_diff(&mean, &trace.output) < 1e-12);
    assert_eq!(trace.running_outputs().last().unwrap(), &trace.output);
}

#[test]
fn replaying_a_config_is_bit_identical() {
    let problem = make_matrix_game_quadratic(6, 9).unwrap();
    let mut config = SolverConfig::new(50, 0.02, 5.0);
    config.start = StartPoint::Gaussian;
    config.averaging = Averaging::LinearWeight;
    assert_eq!(cgm_run(&problem, &config).unwrap(), cgm_run(&problem, &config).unwrap());
}

#[test]
fn simplex_instances_dispatch_to_the_direct_update() {
    let problem = make_matrix_game_simplex(4, 2).unwrap();
    let mut config = SolverConfig::new(30, 0.01, 20.0);
    config.start = StartPoint::Feasible;
    let direct = simplex_cgm_run(&problem, &config).unwrap();
    assert_eq!(cgm_run(&problem, &config).unwrap(), direct);
    // the direct update keeps ∑x = 1 and stays inside from a feasible start
    assert!(problem.feasibility(&direct.final_iterate) < 1e-12);
    assert!(direct.max_update_residual() < 1e-12);
}

#[test]
fn forsaken_runs_from_its_default_start() {
    let problem = make_forsaken();
    let trace = cgm_run(&problem, &SolverConfig::new(64, 0.1, 2.0)).unwrap();
    assert!(trace.output.iter().all(|v| v.is_finite()));
}

#[test]
fn invalid_configs_are_rejected() {
    let problem = make_forsaken();
    let zero_iterations = cgm_run(&problem, &SolverConfig::new(0, 0.1, 1.0));
    assert!(matches!(zero_iterations, Err(Error::InvalidConfig(_))));
    let negative_alpha = cgm_run(&problem, &SolverConfig::new(10, 0.1, -1.0));
    assert!(negative_alpha.is_err());
}

#[test]
fn rate_fit_recovers_a_planted_power_law() {
    let pts: Vec<(f64, f64)> = [100.0, 1000.0, 10000.0].iter().map(|t: &f64| (*t, 3.0 * t.powf(-0.5))).collect();
    let fit = rate_fit(&pts).unwrap();
    assert!((fit.slope + 0.5).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
}
