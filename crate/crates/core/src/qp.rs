//! Direction subproblem `min_{v ∈ V_α(x)} ½‖v + F(x)‖²`.
//!
//! Every solver returns the multipliers `λ ≥ 0` with `v = −F − Gᵀλ` and the
//! certificate `Δ = −λᵀ(b + Gv)`. For any `v' ∈ V`,
//! `(v + F)ᵀ(v − v') = −λᵀG(v − v') ≤ Δ`, so `Δ ≤ ε/2` is exactly the
//! inexactness condition the outer loop requires.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::VelocityPolytope;
use crate::linalg::{self, Cholesky, Matrix};
use crate::problems::ConstraintFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverTag {
    ClosedForm,
    ActiveSet,
    DualProjectedGradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionResult {
    pub v: Vec<f64>,
    /// One multiplier per polytope row.
    pub dual: Vec<f64>,
    /// `−λᵀ(b + Gv)`.
    pub delta: f64,
    pub solver: SolverTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpMethod {
    /// Active set up to `fallback_threshold` rows, dual projected gradient above.
    Auto,
    ActiveSet,
    DualProjectedGradient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QpOptions {
    pub method: QpMethod,
    pub fallback_threshold: usize,
    pub max_dual_sweeps: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            method: QpMethod::Auto,
            fallback_threshold: 64,
            max_dual_sweeps: 100_000,
        }
    }
}

/// Feasibility and stationarity tolerance `10⁻⁹(1 + ‖F‖ + ‖b‖)`.
pub fn tolerance(polytope: &VelocityPolytope, fx: &[f64]) -> f64 {
    1e-9 * (1.0 + linalg::norm(fx) + linalg::norm(&polytope.offsets))
}

/// Closed-form direction for a single constraint.
///
/// `λ = max{0, (αg − ∇gᵀF)/‖∇g‖²}` when `g ≥ 0` and `λ = 0` otherwise;
/// `v = −F − λ∇g`, exact, so `Δ = 0`.
pub fn solve_direction_single(g: f64, grad_g: &[f64], fx: &[f64], alpha: f64) -> Result<DirectionResult> {
    if !(alpha > 0.0) {
        return Err(Error::invalid_argument("alpha must be positive"));
    }
    let mut lambda = 0.0;
    if g >= 0.0 {
        let gn2 = linalg::norm_sq(grad_g);
        if gn2 == 0.0 {
            if g > 0.0 {
                return Err(Error::InfeasibleLinearization { constraint: 0, value: g });
            }
        } else {
            lambda = ((alpha * g - linalg::dot(grad_g, fx)) / gn2).max(0.0);
        }
    }
    let mut v: Vec<f64> = fx.iter().map(|f| -f).collect();
    if lambda > 0.0 {
        linalg::axpy(-lambda, grad_g, &mut v);
    }
    Ok(DirectionResult {
        v,
        dual: vec![lambda],
        delta: 0.0,
        solver: SolverTag::ClosedForm,
    })
}

/// Solves the direction QP over a general polytope.
///
/// With no rows the answer is `v = −F`. Otherwise a dual active-set method
/// runs (or, above `fallback_threshold` rows, projected gradient on the dual
/// `min_{λ≥0} ½λᵀGGᵀλ + λᵀ(GF − b)`), and the result satisfies `Δ ≤ ε/2`.
pub fn solve_direction_generic(
    polytope: &VelocityPolytope,
    fx: &[f64],
    epsilon: f64,
    options: &QpOptions,
) -> Result<DirectionResult> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid_argument("epsilon must be nonnegative"));
    }
    if polytope.is_empty() {
        return Ok(DirectionResult {
            v: fx.iter().map(|f| -f).collect(),
            dual: Vec::new(),
            delta: 0.0,
            solver: SolverTag::ActiveSet,
        });
    }
    let use_dual_pg = match options.method {
        QpMethod::Auto => polytope.len() > options.fallback_threshold,
        QpMethod::ActiveSet => false,
        QpMethod::DualProjectedGradient => true,
    };
    if use_dual_pg {
        dual_projected_gradient(polytope, fx, epsilon, options.max_dual_sweeps)
    } else {
        active_set(polytope, fx, epsilon)
    }
}

fn primal_from_dual(normals: &Matrix, fx: &[f64], dual: &[f64]) -> Vec<f64> {
    let mut v = normals.tr_mul_vec(dual);
    v.iter_mut().zip(fx).for_each(|(vi, f)| *vi = -*vi - f);
    v
}

fn certificate(dual: &[f64], residuals: &[f64]) -> f64 {
    -linalg::dot(dual, residuals)
}

/// Slack allowed on `Δ ≤ ε/2` for round-off in `−λᵀ(b + Gv)`.
fn certificate_slack(dual: &[f64], tol: f64) -> f64 {
    tol * (1.0 + dual.iter().sum::<f64>())
}

/// Dual (Goldfarb–Idnani style) active-set method specialized to the
/// identity Hessian.
///
/// Starts from the unconstrained minimizer `v = −F` and repeatedly adds the
/// most violated row. Each addition moves along the component of the new
/// normal orthogonal to the working normals; a multiplier that would turn
/// negative first is dropped from the working set (partial step). The
/// working normals stay linearly independent, so every inner solve is a
/// Cholesky solve on their Gram matrix.
fn active_set(polytope: &VelocityPolytope, fx: &[f64], epsilon: f64) -> Result<DirectionResult> {
    let k = polytope.len();
    let g = &polytope.normals;
    let tol = tolerance(polytope, fx);
    let max_pivots = 10 * k;

    let mut v: Vec<f64> = fx.iter().map(|f| -f).collect();
    let mut dual = vec![0.0; k];
    let mut working: Vec<usize> = Vec::new();
    let mut pivots = 0usize;

    let fail = |v: &[f64], dual: &[f64], pivots: usize| {
        let residuals = polytope.residuals(v);
        Error::MaxIterations {
            iterations: pivots,
            best_v: v.to_vec(),
            delta: certificate(dual, &residuals),
        }
    };

    loop {
        // most violated row outside the working set
        let residuals = polytope.residuals(&v);
        let mut candidate = None;
        let mut worst = tol;
        for (i, r) in residuals.iter().enumerate() {
            if *r > worst && !working.contains(&i) {
                worst = *r;
                candidate = Some(i);
            }
        }
        let Some(p) = candidate else { break };
        let np = g.row(p);
        let np_norm2 = linalg::norm_sq(np);

        loop {
            // r = (N Nᵀ)⁻¹ N n_p,  z = n_p − Nᵀ r
            let (r, z) = if working.is_empty() {
                (Vec::new(), np.to_vec())
            } else {
                let nw = Matrix::from_fn(working.len(), g.cols(), |a, j| g[(working[a], j)]);
                let rhs = nw.mul_vec(np);
                let chol = Cholesky::factor(&nw.gram_rows()).ok_or_else(|| fail(&v, &dual, pivots))?;
                let r = chol.solve(&rhs);
                let mut z = np.to_vec();
                linalg::axpy(-1.0, &nw.tr_mul_vec(&r), &mut z);
                (r, z)
            };
            let z2 = linalg::norm_sq(&z);
            let independent = z2 > 1e-14 * np_norm2;
            let violation = linalg::dot(np, &v) + polytope.offsets[p];

            let full_step = if independent { violation / z2 } else { f64::INFINITY };
            let mut partial_step = f64::INFINITY;
            let mut blocking = None;
            for (a, ra) in r.iter().enumerate() {
                if *ra > 0.0 {
                    let t = dual[working[a]] / ra;
                    if t < partial_step {
                        partial_step = t;
                        blocking = Some(a);
                    }
                }
            }
            if !independent && blocking.is_none() {
                // n_p = Nᵀr with r ≤ 0: rows of the working set combine into
                // a Farkas certificate.
                return Err(Error::InfeasibleSubproblem { residual: violation });
            }
            let t = full_step.min(partial_step);
            if independent {
                linalg::axpy(-t, &z, &mut v);
            }
            for (a, ra) in r.iter().enumerate() {
                let w = working[a];
                dual[w] = (dual[w] - t * ra).max(0.0);
            }
            dual[p] += t;
            pivots += 1;
            if pivots > max_pivots {
                return Err(fail(&v, &dual, pivots));
            }
            if full_step <= partial_step {
                working.push(p);
                break;
            }
            let a = blocking.expect("partial step has a blocking row");
            dual[working[a]] = 0.0;
            working.remove(a);
        }
    }

    let v = primal_from_dual(g, fx, &dual);
    let residuals = polytope.residuals(&v);
    let delta = certificate(&dual, &residuals);
    if delta > 0.5 * epsilon + certificate_slack(&dual, tol) {
        return Err(Error::MaxIterations {
            iterations: pivots,
            best_v: v,
            delta,
        });
    }
    Ok(DirectionResult {
        v,
        dual,
        delta,
        solver: SolverTag::ActiveSet,
    })
}

/// Projected gradient on the dual with step `1/L`, `L ≥ ‖GGᵀ‖₂`.
fn dual_projected_gradient(
    polytope: &VelocityPolytope,
    fx: &[f64],
    epsilon: f64,
    max_sweeps: usize,
) -> Result<DirectionResult> {
    let k = polytope.len();
    let g = &polytope.normals;
    let tol = tolerance(polytope, fx);
    let gram = g.gram_rows();
    // max absolute row sum bounds the spectral norm of a symmetric matrix
    let lipschitz = (0..k)
        .map(|i| gram.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .min(gram.frobenius_norm());
    if lipschitz == 0.0 {
        // every row is zero; feasible only when all offsets are ≤ 0
        let v: Vec<f64> = fx.iter().map(|f| -f).collect();
        return if polytope.offsets.iter().all(|b| *b <= tol) {
            Ok(DirectionResult {
                v,
                dual: vec![0.0; k],
                delta: 0.0,
                solver: SolverTag::DualProjectedGradient,
            })
        } else {
            Err(Error::InfeasibleSubproblem {
                residual: polytope.offsets.iter().cloned().fold(0.0, f64::max),
            })
        };
    }
    let step = 1.0 / lipschitz;
    let blowup = 1e12 * (1.0 + linalg::norm(fx) + linalg::norm(&polytope.offsets)) * step;

    let mut dual = vec![0.0; k];
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for _ in 0..max_sweeps {
        let v = primal_from_dual(g, fx, &dual);
        let residuals = polytope.residuals(&v);
        let violation = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let delta = certificate(&dual, &residuals);
        if violation <= tol && delta <= 0.5 * epsilon + certificate_slack(&dual, tol) {
            return Ok(DirectionResult {
                v,
                dual,
                delta,
                solver: SolverTag::DualProjectedGradient,
            });
        }
        if best.as_ref().is_none_or(|(bv, _, _)| violation < *bv) {
            best = Some((violation, v, delta));
        }
        // gradient of the dual objective is −(Gv + b)
        for (l, r) in dual.iter_mut().zip(&residuals) {
            *l = (*l + step * r).max(0.0);
        }
        if linalg::norm(&dual) > blowup {
            return Err(Error::InfeasibleSubproblem { residual: violation });
        }
    }
    let (_, best_v, delta) = best.expect("at least one sweep ran");
    Err(Error::MaxIterations {
        iterations: max_sweeps,
        best_v,
        delta,
    })
}

/// Smooth aggregate `g(x) = log ∑ exp(g_i(x))` of several constraints.
///
/// `g ≥ max_i g_i`, so `{g ≤ 0}` is an inner approximation of the original
/// feasible set. The gradient `∑ softmax_i ∇g_i` is evaluated with a
/// max-shift.
pub struct LogSumExp {
    parts: Vec<Box<dyn ConstraintFn>>,
}

pub fn logsumexp_aggregate(parts: Vec<Box<dyn ConstraintFn>>) -> Result<LogSumExp> {
    if parts.is_empty() {
        return Err(Error::invalid_argument("log-sum-exp needs at least one constraint"));
    }
    Ok(LogSumExp { parts })
}

/// `log ∑ exp(values)` with max-shift.
pub fn logsumexp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + libm::log(values.iter().map(|v| libm::exp(v - m)).sum::<f64>())
}

impl ConstraintFn for LogSumExp {
    fn value(&self, x: &[f64]) -> f64 {
        let values: Vec<f64> = self.parts.iter().map(|g| g.value(x)).collect();
        logsumexp(&values)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = x.len();
        let mut grads = Vec::with_capacity(self.parts.len());
        let mut values = Vec::with_capacity(self.parts.len());
        for g in &self.parts {
            let mut gi = vec![0.0; d];
            values.push(g.value_and_gradient(x, &mut gi));
            grads.push(gi);
        }
        let total = logsumexp(&values);
        grad.fill(0.0);
        for (v, gi) in values.iter().zip(&grads) {
            linalg::axpy(libm::exp(v - total), gi, grad);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{FnConstraint, HalfSpace};
    use approx::assert_abs_diff_eq;

    fn poly(alpha: f64, rows: &[(Vec<f64>, f64)]) -> VelocityPolytope {
        VelocityPolytope::from_rows(rows[0].0.len(), alpha, rows).unwrap()
    }

    #[test]
    fn no_rows_gives_plain_step() {
        let p = VelocityPolytope::from_rows(2, 1.0, &[]).unwrap();
        let r = solve_direction_generic(&p, &[1.0, 2.0], 1e-8, &QpOptions::default()).unwrap();
        assert_eq!(r.v, vec![-1.0, -2.0]);
        assert_eq!(r.delta, 0.0);
        assert!(r.dual.is_empty());
    }

    #[test]
    fn single_closed_form_examples() {
        let r = solve_direction_single(-0.5, &[1.0, 0.0], &[3.0, -1.0], 1.0).unwrap();
        assert_eq!(r.dual, vec![0.0]);
        assert_eq!(r.v, vec![-3.0, 1.0]);

        let r = solve_direction_single(0.0, &[1.0, 0.0], &[-2.0, 0.0], 1.0).unwrap();
        assert_eq!(r.dual, vec![2.0]);
        assert_eq!(r.v, vec![0.0, 0.0]);

        let r = solve_direction_single(1.0, &[0.0, 2.0], &[1.0, 0.0], 0.5).unwrap();
        assert_abs_diff_eq!(r.dual[0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(r.v[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.v[1], -0.25, epsilon = 1e-15);
    }

    #[test]
    fn single_rejects_zero_gradient_when_violated() {
        let err = solve_direction_single(0.2, &[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLinearization { .. }));
    }

    #[test]
    fn generic_matches_closed_form_on_examples() {
        let cases = [
            (0.0, vec![1.0, 0.0], vec![-2.0, 0.0], 1.0),
            (1.0, vec![0.0, 2.0], vec![1.0, 0.0], 0.5),
            (0.3, vec![1.0, 1.0], vec![-5.0, -5.0], 2.0),
        ];
        for (g, grad, fx, alpha) in cases {
            let single = solve_direction_single(g, &grad, &fx, alpha).unwrap();
            let p = poly(alpha, &[(grad, g)]);
            let generic = solve_direction_generic(&p, &fx, 1e-8, &QpOptions::default()).unwrap();
            assert!(linalg::max_abs_diff(&single.v, &generic.v) < 1e-12);
            assert_abs_diff_eq!(single.dual[0], generic.dual[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn box_corner_needs_two_rows() {
        // v₁ ≤ −1, v₂ ≤ −1 with F = 0 → v = (−1, −1), λ = (1, 1)
        let p = poly(1.0, &[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0)]);
        let r = solve_direction_generic(&p, &[0.0, 0.0], 1e-8, &QpOptions::default()).unwrap();
        assert!(linalg::max_abs_diff(&r.v, &[-1.0, -1.0]) < 1e-12);
        assert!(linalg::max_abs_diff(&r.dual, &[1.0, 1.0]) < 1e-12);
        assert!(r.delta.abs() < 1e-12);
    }

    #[test]
    fn dependent_rows_are_handled() {
        // the pair ±1ᵀv ≤ 0 pins the sum; a third coordinate bound stacks on top
        let p = poly(
            1.0,
            &[
                (vec![1.0, 1.0, 1.0], 0.0),
                (vec![-1.0, -1.0, -1.0], 0.0),
                (vec![-1.0, 0.0, 0.0], 0.0),
            ],
        );
        let r = solve_direction_generic(&p, &[3.0, -1.0, 0.5], 1e-8, &QpOptions::default()).unwrap();
        let sum: f64 = r.v.iter().sum();
        assert!(sum.abs() < 1e-12);
        assert!(r.v[0] >= -1e-12);
        assert!(r.dual.iter().all(|l| *l >= 0.0));
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // v₁ ≤ −1 and −v₁ ≤ −1
        let p = poly(1.0, &[(vec![1.0], 1.0), (vec![-1.0], 1.0)]);
        let err = solve_direction_generic(&p, &[0.0], 1e-8, &QpOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSubproblem { .. }));
        let opts = QpOptions {
            method: QpMethod::DualProjectedGradient,
            ..QpOptions::default()
        };
        let err = solve_direction_generic(&p, &[0.0], 1e-8, &opts).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSubproblem { .. } | Error::MaxIterations { .. }));
    }

    #[test]
    fn dual_projected_gradient_agrees_with_active_set() {
        let p = poly(
            2.0,
            &[
                (vec![1.0, 0.5, 0.0], 0.2),
                (vec![0.0, 1.0, -1.0], 0.1),
                (vec![-0.3, 0.2, 1.0], 0.4),
            ],
        );
        let fx = [-1.0, -2.0, 0.5];
        let exact = solve_direction_generic(&p, &fx, 1e-10, &QpOptions::default()).unwrap();
        let opts = QpOptions {
            method: QpMethod::DualProjectedGradient,
            ..QpOptions::default()
        };
        let pg = solve_direction_generic(&p, &fx, 1e-10, &opts).unwrap();
        assert_eq!(pg.solver, SolverTag::DualProjectedGradient);
        assert!(linalg::max_abs_diff(&exact.v, &pg.v) < 1e-4);
        assert!(pg.delta <= 0.5e-10 + 1e-8);
    }

    #[test]
    fn dual_sweep_cap_reports_best_iterate() {
        let p = poly(1.0, &[(vec![1.0, 1e-3], 1.0), (vec![1.0, -1e-3], 1.0)]);
        let opts = QpOptions {
            method: QpMethod::DualProjectedGradient,
            max_dual_sweeps: 1,
            ..QpOptions::default()
        };
        match solve_direction_generic(&p, &[0.0, 0.0], 0.0, &opts) {
            Err(Error::MaxIterations { iterations, best_v, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(best_v.len(), 2);
            }
            other => panic!("expected MaxIterations, got {other:?}"),
        }
    }

    #[test]
    fn logsumexp_examples() {
        let one = logsumexp_aggregate(vec![Box::new(HalfSpace::new(vec![1.0, 0.0], 0.5))]).unwrap();
        assert_abs_diff_eq!(one.value(&[2.0, 3.0]), 1.5, epsilon = 1e-15);

        let zero = |_: &[f64]| 0.0;
        let zgrad = |_: &[f64], g: &mut [f64]| g.fill(1.0);
        let two = logsumexp_aggregate(vec![
            Box::new(FnConstraint::new(zero, zgrad)),
            Box::new(FnConstraint::new(zero, zgrad)),
        ])
        .unwrap();
        assert_abs_diff_eq!(two.value(&[0.0]), libm::log(2.0), epsilon = 1e-15);
        let g = two.gradient(&[0.0]);
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-15);

        let big = logsumexp(&[1000.0, 0.0]);
        assert!(big.is_finite());
        assert_abs_diff_eq!(big, 1000.0 + libm::log1p(libm::exp(-1000.0)), epsilon = 1e-12);
        assert!(logsumexp_aggregate(Vec::new()).is_err());
    }

    #[test]
    fn logsumexp_dominates_max() {
        let parts: Vec<Box<dyn ConstraintFn>> = vec![
            Box::new(HalfSpace::new(vec![1.0, 0.0], 1.0)),
            Box::new(HalfSpace::new(vec![0.0, 1.0], 1.0)),
            Box::new(HalfSpace::new(vec![-1.0, -1.0], 1.0)),
        ];
        let values = |x: &[f64]| parts.iter().map(|g| g.value(x)).fold(f64::NEG_INFINITY, f64::max);
        let x = [0.3, -0.2];
        let max = values(&x);
        let agg = logsumexp_aggregate(parts).unwrap();
        assert!(agg.value(&x) >= max);
    }
}
