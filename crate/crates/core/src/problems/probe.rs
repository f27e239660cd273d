//! Randomized structural checks on an instance: monotonicity of `F`,
//! convexity of each `g_i`, and containment of the feasible set in the
//! `D`-ball.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::constants::sample_in_ball;
use super::ProblemInstance;
use crate::linalg;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbeReport {
    pub monotonicity_trials: usize,
    pub monotonicity_violations: usize,
    /// Most negative `(F(x)−F(y))ᵀ(x−y) − μ‖x−y‖² + tol`.
    pub worst_monotonicity_slack: f64,
    pub convexity_trials: usize,
    pub convexity_violations: usize,
    pub containment_trials: usize,
    pub containment_violations: usize,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.monotonicity_violations == 0
            && self.convexity_violations == 0
            && self.containment_violations == 0
    }
}

/// Pairs `(x, y)` in the `D`-ball with
/// `(F(x)−F(y))ᵀ(x−y) ≥ μ‖x−y‖² − 10⁻¹⁰(1+‖x−y‖²)`, counting violations.
/// Stochastic operators are probed at their mean.
pub fn probe_monotonicity(problem: &ProblemInstance, pairs: usize, seed: u64) -> (usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.dim();
    let radius = problem.constants.radius;
    let mu = problem.constants.strong_monotonicity;
    let (mut fx, mut fy) = (vec![0.0; d], vec![0.0; d]);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let x = sample_in_ball(&mut rng, d, radius);
        let y = sample_in_ball(&mut rng, d, radius);
        problem.eval_mean_operator(&x, &mut fx);
        problem.eval_mean_operator(&y, &mut fy);
        let mut inner = 0.0;
        let mut dist2 = 0.0;
        for i in 0..d {
            inner += (fx[i] - fy[i]) * (x[i] - y[i]);
            dist2 += (x[i] - y[i]) * (x[i] - y[i]);
        }
        let slack = inner - mu * dist2 + 1e-10 * (1.0 + dist2);
        worst = worst.min(slack);
        if slack < 0.0 {
            violations += 1;
        }
    }
    (violations, worst)
}

/// `g_i(θx + (1−θ)y) ≤ θg_i(x) + (1−θ)g_i(y) + 10⁻¹⁰` on random triples.
pub fn probe_convexity(problem: &ProblemInstance, trials: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.dim();
    let radius = 2.0 * problem.constants.radius;
    let mut violations = 0;
    for _ in 0..trials {
        let x = sample_in_ball(&mut rng, d, radius);
        let y = sample_in_ball(&mut rng, d, radius);
        let theta: f64 = rng.random();
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        for g in problem.constraints() {
            let lhs = g.value(&mid);
            let rhs = theta * g.value(&x) + (1.0 - theta) * g.value(&y);
            if lhs > rhs + 1e-10 {
                violations += 1;
            }
        }
    }
    violations
}

/// Points along random rays out to radius `2D`: every feasible one must
/// satisfy `‖x‖ ≤ D`. Returns `(feasible samples, violations)`.
pub fn probe_containment(problem: &ProblemInstance, samples: usize, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = problem.dim();
    let radius = problem.constants.radius;
    let mut feasible = 0;
    let mut violations = 0;
    for _ in 0..samples {
        let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = linalg::norm(&x);
        let r = 2.0 * radius * rng.random::<f64>();
        x.iter_mut().for_each(|v| *v *= r / n);
        if problem.is_feasible(&x) {
            feasible += 1;
            if linalg::norm(&x) > radius * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    (feasible, violations)
}

/// Runs all three probes. The monotonicity probe is skipped for instances
/// not flagged monotone.
pub fn self_test(problem: &ProblemInstance, trials: usize, seed: u64) -> ProbeReport {
    let mut report = ProbeReport::default();
    if problem.monotone {
        let (v, worst) = probe_monotonicity(problem, trials, seed);
        report.monotonicity_trials = trials;
        report.monotonicity_violations = v;
        report.worst_monotonicity_slack = worst;
    }
    report.convexity_trials = trials;
    report.convexity_violations = probe_convexity(problem, trials, seed ^ 0x5eed);
    let (feasible, v) = probe_containment(problem, trials, seed ^ 0xba11);
    report.containment_trials = feasible;
    report.containment_violations = v;
    report
}
