//! Gap evaluators, feasibility, rate fitting and the theory bounds.
//!
//! The weak gap `max_{x∈C} F(x)ᵀ(x̂ − x)` has no general closed form, so
//! each instance family reports its own surrogate and labels it with a
//! [`GapKind`]:
//!
//! - single quadratic constraint: `√(2c F(ẑ)ᵀB⁻¹F(ẑ)) = −min_{½zᵀBz≤c} zᵀF(ẑ)`.
//!   The payoff offset that a full strong gap would add is deliberately left
//!   out.
//! - simplex game: `|max (Aᵀx̂)_i| + |min (Aŷ)_i|`.
//! - otherwise: distance to a known reference solution.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky, Matrix};
use crate::problems::{GapModel, ProblemConstants, ProblemInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapKind {
    QuadraticClosedForm,
    SimplexBound,
    DistanceToReference,
}

impl GapKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapKind::QuadraticClosedForm => "quadratic-closed-form",
            GapKind::SimplexBound => "simplex-bound",
            GapKind::DistanceToReference => "distance-to-reference",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterateKind {
    Average,
    Last,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub gap_value: f64,
    pub gap_kind: GapKind,
    pub feasibility: f64,
    pub iterate_kind: IterateKind,
}

/// `√(2c·FᵀB⁻¹F)` with `B` factored once.
#[derive(Clone, Debug)]
pub struct QuadraticGap {
    chol: Cholesky,
    c: f64,
}

impl QuadraticGap {
    pub fn new(b: &Matrix, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid_argument("c must be positive"));
        }
        if b.rows() != b.cols() || !b.is_symmetric(1e-12 * (1.0 + b.frobenius_norm())) {
            return Err(Error::invalid_argument("B must be symmetric"));
        }
        let chol = Cholesky::factor(b).ok_or_else(|| Error::invalid_argument("B is not positive definite"))?;
        Ok(Self { chol, c })
    }

    pub fn eval(&self, fz: &[f64]) -> f64 {
        let w = self.chol.solve(fz);
        libm::sqrt((2.0 * self.c * linalg::dot(fz, &w)).max(0.0))
    }

    /// The radial KKT minimizer `z* = −√(2c/(FᵀB⁻¹F))·B⁻¹F` of `zᵀF` over
    /// `{½zᵀBz ≤ c}`; zero when `F = 0`.
    pub fn minimizer(&self, fz: &[f64]) -> Vec<f64> {
        let w = self.chol.solve(fz);
        let q = linalg::dot(fz, &w);
        if q <= 0.0 {
            return alloc::vec![0.0; fz.len()];
        }
        let s = libm::sqrt(2.0 * self.c / q);
        w.iter().map(|v| -s * v).collect()
    }
}

/// `√(2c·F(ẑ)ᵀB⁻¹F(ẑ))`. The point itself enters only through `F(ẑ)`.
pub fn gap_quadratic_game(_z: &[f64], b: &Matrix, c: f64, fz: &[f64]) -> Result<f64> {
    Ok(QuadraticGap::new(b, c)?.eval(fz))
}

/// `|max_i (Aᵀx̂)_i| + |min_i (Aŷ)_i|`.
pub fn gap_simplex_game(x: &[f64], y: &[f64], a: &Matrix) -> f64 {
    let atx = a.tr_mul_vec(x);
    let ay = a.mul_vec(y);
    let max = atx.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ay.iter().cloned().fold(f64::INFINITY, f64::min);
    max.abs() + min.abs()
}

/// `max_i max{0, g_i(x̂)}`, or the simplex residual for simplex instances.
pub fn feasibility(problem: &ProblemInstance, x: &[f64]) -> f64 {
    problem.feasibility(x)
}

/// A per-instance gap evaluator with its preprocessing done once.
#[derive(Clone, Debug)]
pub enum GapEvaluator {
    Quadratic(QuadraticGap),
    Simplex(Matrix),
    Reference(Vec<f64>),
    Unavailable,
}

impl GapEvaluator {
    pub fn for_problem(problem: &ProblemInstance) -> Result<Self> {
        Ok(match &problem.gap_model {
            GapModel::Quadratic { b, c } => GapEvaluator::Quadratic(QuadraticGap::new(b, *c)?),
            GapModel::SimplexGame { payoff } => GapEvaluator::Simplex(payoff.clone()),
            GapModel::Reference | GapModel::None => match &problem.reference_solution {
                Some(r) => GapEvaluator::Reference(r.clone()),
                None => GapEvaluator::Unavailable,
            },
        })
    }

    pub fn kind(&self) -> Option<GapKind> {
        match self {
            GapEvaluator::Quadratic(_) => Some(GapKind::QuadraticClosedForm),
            GapEvaluator::Simplex(_) => Some(GapKind::SimplexBound),
            GapEvaluator::Reference(_) => Some(GapKind::DistanceToReference),
            GapEvaluator::Unavailable => None,
        }
    }

    /// Gap at `x`, evaluating the mean operator where needed.
    pub fn gap(&self, problem: &ProblemInstance, x: &[f64]) -> Option<f64> {
        match self {
            GapEvaluator::Quadratic(q) => Some(q.eval(&problem.mean_operator(x))),
            GapEvaluator::Simplex(a) => {
                let (xs, ys) = x.split_at(a.rows());
                Some(gap_simplex_game(xs, ys, a))
            }
            GapEvaluator::Reference(r) => Some(linalg::distance(x, r)),
            GapEvaluator::Unavailable => None,
        }
    }

    pub fn report(&self, problem: &ProblemInstance, x: &[f64], iterate_kind: IterateKind) -> Option<GapReport> {
        Some(GapReport {
            gap_value: self.gap(problem, x)?,
            gap_kind: self.kind()?,
            feasibility: problem.feasibility(x),
            iterate_kind,
        })
    }
}

/// Least-squares fit of `log gap = intercept + slope·log T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for an exact fit).
    pub slope_std_error: f64,
    pub r_squared: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
    pub points: usize,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::invalid_argument("rate fit needs at least 3 points"));
    }
    if points.iter().any(|(t, g)| !(*t > 0.0 && *g > 0.0 && t.is_finite() && g.is_finite())) {
        return Err(Error::invalid_argument("rate fit needs positive finite T and gap values"));
    }
    let xs: Vec<f64> = points.iter().map(|(t, _)| libm::log(*t)).collect();
    let ys: Vec<f64> = points.iter().map(|(_, g)| libm::log(*g)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid_argument("rate fit needs at least two distinct T values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    Ok(RateFit {
        slope,
        intercept,
        slope_std_error: libm::sqrt(sse / (n - 2.0) / sxx),
        r_squared: if syy == 0.0 { 1.0 } else { 1.0 - sse / syy },
        max_residual: residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs())),
        points: points.len(),
    })
}

/// Riemann zeta `ζ(p) = ∑ n^{−p}` for `p > 1`: a 10⁶-term partial sum plus
/// the midpoint of the integral bounds on the tail.
pub fn zeta(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid_argument("zeta needs p > 1"));
    }
    const TERMS: u32 = 1_000_000;
    // smallest terms first
    let partial: f64 = (1..=TERMS).rev().map(|n| libm::pow(n as f64, -p)).sum();
    let n = TERMS as f64;
    let upper = libm::pow(n, 1.0 - p) / (p - 1.0);
    let lower = libm::pow(n + 1.0, 1.0 - p) / (p - 1.0);
    Ok(partial + 0.5 * (upper + lower))
}

/// Bounds `(‖x_t‖², ‖v_t‖²)`:
/// `γD² + γ(γ−1)(D + 4L_F/α)²` and `(γ+1)α²D² + γ(γ+1)α²(D + 4L_F/α)²`.
pub fn lemma1_bounds(radius: f64, operator_bound: f64, alpha: f64, gamma: f64) -> (f64, f64) {
    let d = radius;
    let r = d + 4.0 * operator_bound / alpha;
    let x2 = gamma * d * d + gamma * (gamma - 1.0) * r * r;
    let v2 = (gamma + 1.0) * alpha * alpha * d * d + gamma * (gamma + 1.0) * alpha * alpha * r * r;
    (x2, v2)
}

/// Run parameters the bounds depend on.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundInputs {
    pub iterations: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub alpha: Option<f64>,
    /// `f(x₀) − f(x*)` for minimization instances.
    pub initial_objective_gap: Option<f64>,
}

/// Every bound whose constants are available; missing ones are `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TheoryBounds {
    pub lemma1_x_bound: Option<f64>,
    pub lemma1_v_bound: Option<f64>,
    pub thm1_gap_bound: Option<f64>,
    pub thm1_feas_bound: Option<f64>,
    pub thm2_gap_bound: Option<f64>,
    pub thm2_feas_bound: Option<f64>,
    /// `1 − 2/(γ+1)`, the rate exponent in `thm2_feas_bound`.
    pub thm2_feas_exponent: Option<f64>,
    pub thm3_obj_bound: Option<f64>,
    pub thm3_feas_bound: Option<f64>,
}

pub fn theory_bounds(constants: &ProblemConstants, inputs: &BoundInputs) -> Result<TheoryBounds> {
    if inputs.iterations == 0 {
        return Err(Error::invalid_argument("bounds need T ≥ 1"));
    }
    if !(inputs.gamma > 1.0) {
        return Err(Error::invalid_argument("bounds need γ > 1"));
    }
    let big_t = inputs.iterations as f64;
    let sqrt_t = libm::sqrt(big_t);
    let d = constants.radius;
    let lf = constants.operator_bound;
    let lg = constants.constraint_lipschitz;
    let sg = constants.constraint_smoothness;
    let mu = (constants.strong_monotonicity > 0.0).then_some(constants.strong_monotonicity);
    let gamma = inputs.gamma;
    let half_eps = 0.5 * inputs.epsilon;
    let sqrt2 = core::f64::consts::SQRT_2;
    let mut out = TheoryBounds::default();

    if let (Some(lf), Some(alpha)) = (lf, inputs.alpha) {
        let (x2, v2) = lemma1_bounds(d, lf, alpha, gamma);
        out.lemma1_x_bound = Some(x2);
        out.lemma1_v_bound = Some(v2);
    }
    if let Some(lf) = lf {
        out.thm1_gap_bound = Some(10.0 * sqrt2 * lf * d / sqrt_t + half_eps);
    }
    if let (Some(lg), Some(sg)) = (lg, sg) {
        out.thm1_feas_bound = Some(sqrt2 * d * lg.max(5.0 * sg * d) / sqrt_t);
    }
    if let (Some(lf), Some(mu)) = (lf, mu) {
        let m = 2.0 * (gamma + 1.0) * (d + 2.0 * lf / mu);
        if inputs.iterations >= 2 {
            out.thm2_gap_bound = Some(mu * m * m / (big_t - 1.0) + half_eps);
        }
        if let (Some(lg), Some(sg)) = (lg, sg) {
            let exponent = 1.0 - 2.0 / (gamma + 1.0);
            let z = zeta(1.0 + 2.0 / (gamma + 1.0))?;
            let head = (12.0 * m * lg).max(6.0 * sg * m * m);
            out.thm2_feas_bound = Some((head + 6.0 * sg * m * m * z) / libm::pow(big_t + 1.0, exponent));
            out.thm2_feas_exponent = Some(exponent);
        }
    }
    if let Some(gap) = inputs.initial_objective_gap {
        out.thm3_obj_bound = Some(gap / big_t);
    }
    if let (Some(lfo), Some(mu), Some(lg), Some(sg)) = (constants.objective_lipschitz, mu, lg, sg) {
        let m = 3.0 * (d + 4.0 * lfo / mu);
        out.thm3_feas_bound = Some(m * (2.0 * lg).max(sg * m) * libm::log(big_t) / (2.0 * big_t));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_gap_examples() {
        let g = gap_quadratic_game(&[0.0, 0.0], &Matrix::identity(2), 0.5, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-15);
        let g = gap_quadratic_game(&[0.0, 0.0], &Matrix::diagonal(&[2.0, 2.0]), 1.0, &[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_gap_rejects_non_spd() {
        let b = Matrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(gap_quadratic_game(&[0.0; 2], &b, 1.0, &[1.0, 0.0]), Err(Error::InvalidArgument(_))));
        let asym = Matrix::from_row_major(2, 2, vec![1.0, 0.5, 0.0, 1.0]);
        assert!(QuadraticGap::new(&asym, 1.0).is_err());
        assert!(QuadraticGap::new(&Matrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn quadratic_minimizer_attains_gap() {
        let b = Matrix::from_row_major(2, 2, vec![3.0, 1.0, 1.0, 2.0]);
        let q = QuadraticGap::new(&b, 0.7).unwrap();
        let f = [0.4, -1.3];
        let z = q.minimizer(&f);
        let bz = b.mul_vec(&z);
        assert_abs_diff_eq!(0.5 * linalg::dot(&z, &bz), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(-linalg::dot(&z, &f), q.eval(&f), epsilon = 1e-12);
    }

    #[test]
    fn simplex_gap_examples() {
        let half = [0.5, 0.5];
        assert_abs_diff_eq!(gap_simplex_game(&half, &half, &Matrix::identity(2)), 1.0);
        assert_eq!(gap_simplex_game(&half, &half, &Matrix::zeros(2, 2)), 0.0);

        let a = Matrix::from_row_major(2, 2, vec![1.0, -2.0, 0.5, 3.0]);
        let x = [0.3, 0.7];
        let swapped = Matrix::from_row_major(2, 2, vec![0.5, 3.0, 1.0, -2.0]);
        let first = |a: &Matrix, x: &[f64]| a.tr_mul_vec(x).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(first(&a, &x), first(&swapped, &[0.7, 0.3]), epsilon = 1e-15);
    }

    #[test]
    fn rate_fit_recovers_exponents() {
        for p in [-0.5, -1.0, 0.0] {
            let pts: Vec<(f64, f64)> = [16.0, 64.0, 256.0, 1024.0]
                .iter()
                .map(|t| (*t, 3.0 * libm::pow(*t, p)))
                .collect();
            let fit = rate_fit(&pts).unwrap();
            assert_abs_diff_eq!(fit.slope, p, epsilon = 1e-10);
            assert!(fit.max_residual < 1e-10);
        }
        assert!(rate_fit(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(rate_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn zeta_two() {
        let z = zeta(2.0).unwrap();
        assert_abs_diff_eq!(z, core::f64::consts::PI * core::f64::consts::PI / 6.0, epsilon = 1e-9);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        let (x2, _) = lemma1_bounds(1.0, 1.0, 1.0, 1.5);
        assert_abs_diff_eq!(x2, 20.25, epsilon = 1e-12);

        let c = ProblemConstants {
            operator_bound: Some(1.0),
            ..ProblemConstants::with_radius(1.0)
        };
        let b = theory_bounds(
            &c,
            &BoundInputs {
                iterations: 100,
                epsilon: 0.0,
                gamma: 1.5,
                alpha: Some(1.0),
                initial_objective_gap: None,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(b.thm1_gap_bound.unwrap(), core::f64::consts::SQRT_2, epsilon = 1e-12);
        assert!(b.thm1_feas_bound.is_none());
        assert!(b.thm2_gap_bound.is_none());
    }

    #[test]
    fn all_bounds_positive_and_finite() {
        let c = ProblemConstants {
            operator_bound: Some(2.0),
            constraint_lipschitz: Some(3.0),
            constraint_smoothness: Some(1.0),
            strong_monotonicity: 0.5,
            objective_smoothness: Some(1.0),
            objective_lipschitz: Some(2.0),
            ..ProblemConstants::with_radius(1.5)
        };
        let b = theory_bounds(
            &c,
            &BoundInputs {
                iterations: 64,
                epsilon: 1e-8,
                gamma: 3.0,
                alpha: Some(0.25),
                initial_objective_gap: Some(4.0),
            },
        )
        .unwrap();
        for v in [
            b.lemma1_x_bound,
            b.lemma1_v_bound,
            b.thm1_gap_bound,
            b.thm1_feas_bound,
            b.thm2_gap_bound,
            b.thm2_feas_bound,
            b.thm3_obj_bound,
            b.thm3_feas_bound,
        ] {
            let v = v.unwrap();
            assert!(v > 0.0 && v.is_finite());
        }
        assert_abs_diff_eq!(b.thm2_feas_exponent.unwrap(), 0.5);
    }
}
