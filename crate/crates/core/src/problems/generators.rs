//! Benchmark instances: the 2-D ellipse-constrained games, the bilinear
//! matrix games, and seeded synthetic families used by the theory checks.
//!
//! Every generator is a pure function of its arguments; equal `(d, seed)`
//! yields bit-identical instances.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal, Uniform};

use super::constants::{estimate_constants, ConstantsSource, ProblemConstants};
use super::functions::{
    BallConstraint, ConstraintFn, HalfSpace, ObjectiveFn, QuadraticConstraint, StochasticField,
};
use super::{FeasibleShape, GapModel, Operator, Potential, ProblemInstance, Structure};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Samples used by the empirical constant estimator.
pub const CONSTANT_SAMPLES: usize = 10_000;
/// Safety factor applied to sampled maxima.
pub const CONSTANT_MARGIN: f64 = 1.5;
/// Inflation applied to power-iteration norm estimates.
const NORM_MARGIN: f64 = 1.05;
const POWER_ITERATIONS: usize = 300;

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn spectral_norm_of(a: &Matrix) -> f64 {
    linalg::spectral_norm(
        a.cols(),
        a.rows(),
        |x, y| a.mul_vec_into(x, y),
        |y, x| a.tr_mul_vec_into(y, x),
        POWER_ITERATIONS,
    )
}

// h(x) = x²/4 − x⁴/2 + x⁶/6
fn forsaken_h(x: f64) -> f64 {
    let x2 = x * x;
    x2 / 4.0 - x2 * x2 / 2.0 + x2 * x2 * x2 / 6.0
}

fn forsaken_dh(x: f64) -> f64 {
    let x2 = x * x;
    x / 2.0 - 2.0 * x2 * x + x2 * x2 * x
}

fn forsaken_d2h(x: f64) -> f64 {
    let x2 = x * x;
    0.5 - 6.0 * x2 + 5.0 * x2 * x2
}

fn forsaken_operator(z: &[f64], out: &mut [f64]) {
    let (x, y) = (z[0], z[1]);
    out[0] = y - 0.45 + forsaken_dh(x);
    out[1] = -x + forsaken_dh(y);
}

/// The interior root of the Forsaken operator, by Newton's method from the
/// origin.
fn forsaken_root() -> Vec<f64> {
    let mut z = [0.0, 0.0];
    let mut f = [0.0; 2];
    for _ in 0..100 {
        forsaken_operator(&z, &mut f);
        // Jacobian [[h''(x), 1], [−1, h''(y)]]
        let (a, b, c, d) = (forsaken_d2h(z[0]), 1.0, -1.0, forsaken_d2h(z[1]));
        let det = a * d - b * c;
        let dx = (d * f[0] - b * f[1]) / det;
        let dy = (-c * f[0] + a * f[1]) / det;
        z[0] -= dx;
        z[1] -= dy;
        if dx.abs() + dy.abs() < 1e-16 {
            break;
        }
    }
    z.to_vec()
}

fn ellipse() -> QuadraticConstraint {
    // x² + 4y² − 1 = ½ zᵀ diag(2, 8) z − 1
    QuadraticConstraint::new(Matrix::diagonal(&[2.0, 8.0]), 1.0)
}

/// Forsaken game `min_x max_y x(y − 0.45) + h(x) − h(y)` on the ellipse
/// `x² + 4y² ≤ 1`, started from the infeasible point `(0.5, 1)`.
///
/// The unconstrained equilibrium lies strictly inside the ellipse and is
/// stored as the reference solution.
pub fn make_forsaken() -> ProblemInstance {
    let g = ellipse();
    let (lf, lg, sg) = estimate_constants(
        2,
        forsaken_operator,
        &[&g as &dyn ConstraintFn],
        2.0,
        CONSTANT_SAMPLES,
        CONSTANT_MARGIN,
        0,
    );
    let constants = ProblemConstants {
        operator_bound: Some(lf),
        constraint_lipschitz: Some(lg),
        constraint_smoothness: Some(sg),
        source: ConstantsSource::Empirical,
        ..ProblemConstants::with_radius(1.0)
    };
    ProblemInstance::builder("forsaken", 2, Operator::Deterministic(Box::new(forsaken_operator)))
        .constraint(g)
        .constants(constants)
        .structure(Structure::SingleConstraint)
        .reference_solution(forsaken_root())
        .default_start(vec![0.5, 1.0])
        .potential(Potential::Saddle {
            value: Box::new(|z: &[f64]| {
                z[0] * (z[1] - 0.45) + forsaken_h(z[0]) - forsaken_h(z[1])
            }),
            split: 1,
        })
        .gap_model(GapModel::Reference)
        .build()
        .expect("forsaken instance is well formed")
}

struct ToyGanField {
    sample_count: usize,
}

impl StochasticField for ToyGanField {
    fn sample(&self, z: &[f64], rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let (x, y) = (z[0], z[1]);
        let n = self.sample_count as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..self.sample_count {
            let u1: f64 = rng.sample(StandardNormal);
            let u2: f64 = rng.sample(StandardNormal);
            m1 += u1 * u1;
            m2 += u2 * u2;
        }
        m1 /= n;
        m2 /= n;
        // φ̂ = y·m1 − y·x²·m2, operator (∂ₓφ̂, −∂ᵧφ̂)
        out[0] = -2.0 * x * y * m2;
        out[1] = x * x * m2 - m1;
    }

    fn mean(&self, z: &[f64], out: &mut [f64]) {
        let (x, y) = (z[0], z[1]);
        out[0] = -2.0 * x * y;
        out[1] = x * x - 1.0;
    }
}

/// Toy GAN `min_x max_y E[y u₁²] − E[y x² u₂²]` on the ellipse
/// `x² + 4y² ≤ 1`; each operator query averages `sample_count` standard
/// normal draws for `u₁` and `u₂`.
///
/// The equilibria `(±1, 0)` sit on the ellipse boundary; the reference is
/// the one reached from the default start `(0.5, 1)`.
pub fn make_toy_gan(sample_count: usize, seed: u64) -> Result<ProblemInstance> {
    if sample_count == 0 {
        return Err(Error::invalid_argument("sample_count must be at least 1"));
    }
    let g = ellipse();
    let field = ToyGanField { sample_count };
    let (lf, lg, sg) = estimate_constants(
        2,
        |x, out| field.mean(x, out),
        &[&g as &dyn ConstraintFn],
        2.0,
        CONSTANT_SAMPLES,
        CONSTANT_MARGIN,
        0,
    );
    let constants = ProblemConstants {
        operator_bound: Some(lf),
        constraint_lipschitz: Some(lg),
        constraint_smoothness: Some(sg),
        source: ConstantsSource::Empirical,
        ..ProblemConstants::with_radius(1.0)
    };
    ProblemInstance::builder(
        "toy_gan",
        2,
        Operator::Stochastic {
            field: Box::new(field),
            sample_count,
        },
    )
    .constraint(g)
    .constants(constants)
    .structure(Structure::SingleConstraint)
    .reference_solution(vec![1.0, 0.0])
    .default_start(vec![0.5, 1.0])
    .potential(Potential::Saddle {
        value: Box::new(|z: &[f64]| z[1] * (1.0 - z[0] * z[0])),
        split: 1,
    })
    .gap_model(GapModel::Reference)
    .sampling_seed(seed)
    .build()
}

/// Random SPD matrix `QΛQᵀ` with Haar-orthogonal `Q` and eigenvalues drawn
/// from `U[lo, hi]`. Returns the matrix with its extreme eigenvalues.
fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> (Matrix, f64, f64) {
    let eig = Uniform::new_inclusive(lo, hi).expect("valid eigenvalue range");
    let lambda: Vec<f64> = (0..n).map(|_| rng.sample(eig)).collect();
    let q = linalg::orthonormalize_columns(&gaussian_matrix(rng, n, n));
    let mut ql = q.clone();
    for i in 0..n {
        for (j, l) in lambda.iter().enumerate() {
            ql[(i, j)] *= l;
        }
    }
    let mut b = ql.matmul(&q.transpose());
    // exact symmetry
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = s;
            b[(j, i)] = s;
        }
    }
    let lmin = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = lambda.iter().cloned().fold(0.0, f64::max);
    (b, lmin, lmax)
}

/// Matrix game `min_x max_y (x − a)ᵀAy` subject to `½ zᵀBz ≤ c`, with
/// `z = (x, y) ∈ ℝ^{2d}` and operator `F(z) = (Ay, −Aᵀ(x − a))`.
///
/// `A` has N(0,1) entries, `a` has N(0, 0.1²) entries, `B = QΛQᵀ` with
/// eigenvalues from U[0.1, 10], and `c ~ U[0.1, 10]`.
pub fn make_matrix_game_quadratic(d: usize, seed: u64) -> Result<ProblemInstance> {
    if d == 0 {
        return Err(Error::invalid_argument("d must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, d, d);
    let shift_dist = Normal::new(0.0, 0.1).expect("valid normal");
    let shift: Vec<f64> = (0..d).map(|_| rng.sample(shift_dist)).collect();
    let n = 2 * d;
    let (b, lmin, lmax) = random_spd(&mut rng, n, 0.1, 10.0);
    let c = rng.sample(Uniform::new_inclusive(0.1, 10.0).expect("valid range"));
    Ok(quadratic_game_from_parts(a, shift, b, c, lmin, lmax, seed))
}

/// Assembles the quadratic-constraint matrix game from explicit data.
pub fn quadratic_game_from_parts(
    a: Matrix,
    shift: Vec<f64>,
    b: Matrix,
    c: f64,
    lambda_min: f64,
    lambda_max: f64,
    seed: u64,
) -> ProblemInstance {
    let d = a.rows();
    let n = 2 * d;
    let radius = libm::sqrt(2.0 * c / lambda_min);
    let sigma = NORM_MARGIN * spectral_norm_of(&a);
    let probe = 2.0 * radius;
    let constants = ProblemConstants {
        // ‖F(z)‖ ≤ ‖A‖·‖z − (a, 0)‖ ≤ ‖A‖(D + ‖a‖) on the D-ball containing C.
        // F is linear, so no global bound exists and the feasible region is
        // the natural domain.
        operator_bound: Some(sigma * (radius + linalg::norm(&shift))),
        constraint_lipschitz: Some(lambda_max * probe),
        constraint_smoothness: Some(lambda_max),
        source: ConstantsSource::Analytic,
        ..ProblemConstants::with_radius(radius)
    };
    let a = Arc::new(a);
    let shift = Arc::new(shift);
    let (op_a, op_shift) = (Arc::clone(&a), Arc::clone(&shift));
    let operator = move |z: &[f64], out: &mut [f64]| {
        let (x, y) = z.split_at(d);
        let (top, bottom) = out.split_at_mut(d);
        op_a.mul_vec_into(y, top);
        let xs: Vec<f64> = x.iter().zip(op_shift.iter()).map(|(xi, si)| xi - si).collect();
        op_a.tr_mul_vec_into(&xs, bottom);
        bottom.iter_mut().for_each(|v| *v = -*v);
    };
    let (pot_a, pot_shift) = (Arc::clone(&a), Arc::clone(&shift));
    let potential = Potential::Saddle {
        value: Box::new(move |z: &[f64]| {
            let (x, y) = z.split_at(d);
            let ay = pot_a.mul_vec(y);
            x.iter().zip(pot_shift.iter()).zip(&ay).map(|((xi, si), v)| (xi - si) * v).sum()
        }),
        split: d,
    };
    let g = QuadraticConstraint::new(b.clone(), c);
    ProblemInstance::builder(format!("quad_game_d{d}"), n, Operator::Deterministic(Box::new(operator)))
        .constraint(g)
        .constants(constants)
        .structure(Structure::SingleConstraint)
        .potential(potential)
        .gap_model(GapModel::Quadratic { b, c })
        .monotone(true)
        .sampling_seed(seed)
        .build()
        .expect("quadratic game is well formed")
}

/// Matrix game `min_x max_y xᵀAy` over the joint simplex
/// `{∑ z_i = 1, z ≥ 0}` in `ℝ^{2d}`, operator `F(z) = (Ay, −Aᵀx)`.
pub fn make_matrix_game_simplex(d: usize, seed: u64) -> Result<ProblemInstance> {
    if d == 0 {
        return Err(Error::invalid_argument("d must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, d, d);
    Ok(simplex_game_from_payoff(a, seed))
}

/// Assembles the simplex matrix game for a given payoff matrix.
pub fn simplex_game_from_payoff(a: Matrix, seed: u64) -> ProblemInstance {
    let d = a.rows();
    assert_eq!(d, a.cols(), "payoff must be square");
    let n = 2 * d;
    let sigma = NORM_MARGIN * spectral_norm_of(&a);
    let constants = ProblemConstants {
        operator_bound: Some(sigma * 2.0),
        // the hyperplane has gradient 1 ∈ ℝ^{2d}; everything is linear
        constraint_lipschitz: Some(libm::sqrt(n as f64)),
        constraint_smoothness: Some(0.0),
        source: ConstantsSource::Analytic,
        ..ProblemConstants::with_radius(1.0)
    };
    let a = Arc::new(a);
    let op_a = Arc::clone(&a);
    let operator = move |z: &[f64], out: &mut [f64]| {
        let (x, y) = z.split_at(d);
        let (top, bottom) = out.split_at_mut(d);
        op_a.mul_vec_into(y, top);
        op_a.tr_mul_vec_into(x, bottom);
        bottom.iter_mut().for_each(|v| *v = -*v);
    };
    let pot_a = Arc::clone(&a);
    let potential = Potential::Saddle {
        value: Box::new(move |z: &[f64]| {
            let (x, y) = z.split_at(d);
            linalg::dot(x, &pot_a.mul_vec(y))
        }),
        split: d,
    };
    let payoff = Arc::try_unwrap(a).unwrap_or_else(|a| (*a).clone());
    ProblemInstance::builder(format!("simplex_game_d{d}"), n, Operator::Deterministic(Box::new(operator)))
        .constants(constants)
        .structure(Structure::Simplex)
        .feasible_shape(FeasibleShape::Simplex)
        .potential(potential)
        .gap_model(GapModel::SimplexGame { payoff })
        .monotone(true)
        .sampling_seed(seed)
        .build()
        .expect("simplex game is well formed")
}

/// Strongly monotone game `F(z) = μz + (Ay, −Aᵀx) − b` on the unit ball
/// `‖z‖² ≤ 1`, `z ∈ ℝ^{2d}`. The shift `b` places the solution at a random
/// interior point of norm ½, stored as the reference solution.
pub fn make_strongly_monotone_ball(d: usize, mu: f64, seed: u64) -> Result<ProblemInstance> {
    if d == 0 {
        return Err(Error::invalid_argument("d must be at least 1"));
    }
    if !(mu > 0.0) {
        return Err(Error::invalid_argument("mu must be positive"));
    }
    let n = 2 * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, d, d);
    let mut solution: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let s = 0.5 / linalg::norm(&solution);
    solution.iter_mut().for_each(|v| *v *= s);
    // M = μI + [[0, A], [−Aᵀ, 0]]
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = mu;
    }
    for i in 0..d {
        for j in 0..d {
            m[(i, d + j)] = a[(i, j)];
            m[(d + j, i)] = -a[(i, j)];
        }
    }
    let shift = m.mul_vec(&solution);
    let radius = 1.0;
    let probe = 2.0 * radius;
    let sigma = NORM_MARGIN * spectral_norm_of(&m);
    let constants = ProblemConstants {
        operator_bound: Some(sigma * probe + linalg::norm(&shift)),
        constraint_lipschitz: Some(2.0 * probe),
        constraint_smoothness: Some(2.0),
        strong_monotonicity: mu,
        source: ConstantsSource::Analytic,
        ..ProblemConstants::with_radius(radius)
    };
    // F = (∇ₓφ, −∇ᵧφ) for φ = μ/2‖x‖² − μ/2‖y‖² + xᵀAy − b_xᵀx + b_yᵀy
    let pot_shift = shift.clone();
    let potential = Potential::Saddle {
        value: Box::new(move |z: &[f64]| {
            let (x, y) = z.split_at(d);
            let (bx, by) = pot_shift.split_at(d);
            0.5 * mu * (linalg::norm_sq(x) - linalg::norm_sq(y)) + linalg::dot(x, &a.mul_vec(y)) - linalg::dot(bx, x)
                + linalg::dot(by, y)
        }),
        split: d,
    };
    let operator = move |z: &[f64], out: &mut [f64]| {
        m.mul_vec_into(z, out);
        linalg::axpy(-1.0, &shift, out);
    };
    ProblemInstance::builder(format!("strongly_monotone_ball_d{d}"), n, Operator::Deterministic(Box::new(operator)))
        .constraint(BallConstraint::centered(n, radius))
        .potential(potential)
        .constants(constants)
        .structure(Structure::SingleConstraint)
        .feasible_shape(FeasibleShape::Ball { radius })
        .reference_solution(solution)
        .gap_model(GapModel::Quadratic {
            b: Matrix::diagonal(&vec![2.0; n]),
            c: radius * radius,
        })
        .monotone(true)
        .sampling_seed(seed)
        .build()
}

/// `f(x) = ½‖x − target‖²`.
#[derive(Clone, Debug)]
pub struct SquaredDistance {
    pub target: Vec<f64>,
}

impl ObjectiveFn for SquaredDistance {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&self.target).map(|(a, t)| (a - t) * (a - t)).sum::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for ((o, a), t) in out.iter_mut().zip(x).zip(&self.target) {
            *o = a - t;
        }
    }
}

/// Minimize `½‖x − target‖²` subject to `‖x‖² ≤ radius²`, posed as the
/// variational inequality with `F = ∇f`. The minimizer is the radial
/// projection of `target` onto the ball.
pub fn make_ball_minimization(target: Vec<f64>, radius: f64) -> Result<ProblemInstance> {
    let n = target.len();
    if n == 0 {
        return Err(Error::invalid_argument("target must be nonempty"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid_argument("radius must be positive"));
    }
    let tn = linalg::norm(&target);
    let solution = if tn > radius {
        target.iter().map(|t| t * radius / tn).collect()
    } else {
        target.clone()
    };
    let probe = 2.0 * radius;
    let lipschitz = probe + tn;
    let constants = ProblemConstants {
        operator_bound: Some(lipschitz),
        constraint_lipschitz: Some(2.0 * probe),
        constraint_smoothness: Some(2.0),
        strong_monotonicity: 1.0,
        objective_smoothness: Some(1.0),
        objective_lipschitz: Some(lipschitz),
        source: ConstantsSource::Analytic,
        ..ProblemConstants::with_radius(radius)
    };
    let (operator, potential) = super::gradient_operator(SquaredDistance { target });
    ProblemInstance::builder("ball_minimization", n, operator)
        .constraint(BallConstraint::centered(n, radius))
        .constants(constants)
        .structure(Structure::SingleConstraint)
        .feasible_shape(FeasibleShape::Ball { radius })
        .reference_solution(solution)
        .potential(potential)
        .gap_model(GapModel::Reference)
        .monotone(true)
        .build()
}

/// Seeded monotone affine operator `F(z) = (μI + S)z − b` (`S` skew) over an
/// intersection of `balls` Euclidean balls and `halfspaces` half-spaces, all
/// containing the origin strictly.
pub fn make_random_monotone(
    d: usize,
    balls: usize,
    halfspaces: usize,
    mu: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if d == 0 {
        return Err(Error::invalid_argument("d must be at least 1"));
    }
    if balls == 0 {
        return Err(Error::invalid_argument("at least one ball keeps the set bounded"));
    }
    if mu < 0.0 {
        return Err(Error::invalid_argument("mu must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, d, d);
    let scale = 1.0 / libm::sqrt(d as f64);
    let m = Matrix::from_fn(d, d, |i, j| {
        scale * (g[(i, j)] - g[(j, i)]) + if i == j { mu } else { 0.0 }
    });
    let shift: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();

    let center_dist = Normal::new(0.0, 0.3).expect("valid normal");
    let extra = Uniform::new(0.5, 1.5).expect("valid range");
    let mut ball_cs = Vec::with_capacity(balls);
    for _ in 0..balls {
        let center: Vec<f64> = (0..d).map(|_| rng.sample(center_dist)).collect();
        let radius = linalg::norm(&center) + rng.sample(extra);
        ball_cs.push(BallConstraint::new(center, radius));
    }
    let offset = Uniform::new(0.2, 1.0).expect("valid range");
    let mut half_cs = Vec::with_capacity(halfspaces);
    for _ in 0..halfspaces {
        let normal: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        half_cs.push(HalfSpace::new(normal, rng.sample(offset)));
    }

    let radius = ball_cs
        .iter()
        .map(|b| linalg::norm(&b.center) + b.radius)
        .fold(f64::INFINITY, f64::min);
    let probe = 2.0 * radius;
    let sigma = NORM_MARGIN * spectral_norm_of(&m);
    let mut lg = 0.0f64;
    for b in &ball_cs {
        lg = lg.max(2.0 * (probe + linalg::norm(&b.center)));
    }
    for h in &half_cs {
        lg = lg.max(linalg::norm(&h.normal));
    }
    let constants = ProblemConstants {
        operator_bound: Some(sigma * probe + linalg::norm(&shift)),
        constraint_lipschitz: Some(lg),
        constraint_smoothness: Some(2.0),
        strong_monotonicity: mu,
        source: ConstantsSource::Analytic,
        ..ProblemConstants::with_radius(radius)
    };
    let operator = move |z: &[f64], out: &mut [f64]| {
        m.mul_vec_into(z, out);
        linalg::axpy(-1.0, &shift, out);
    };
    let mut builder = ProblemInstance::builder(
        format!("random_monotone_d{d}_m{}", balls + halfspaces),
        d,
        Operator::Deterministic(Box::new(operator)),
    )
    .constants(constants)
    .monotone(true)
    .sampling_seed(seed);
    for b in ball_cs {
        builder = builder.constraint(b);
    }
    for h in half_cs {
        builder = builder.constraint(h);
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::OperatorSampler;
    use approx::assert_abs_diff_eq;

    #[test]
    fn forsaken_values() {
        let p = make_forsaken();
        let f = p.mean_operator(&[0.0, 0.0]);
        assert_abs_diff_eq!(f[0], -0.45, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 0.0, epsilon = 1e-15);
        assert_eq!(p.constraint(0).value(&[1.0, 0.0]), 0.0);
        assert_eq!(p.constraint(0).value(&[0.5, 1.0]), 3.25);
        assert_eq!(p.structure, Structure::SingleConstraint);
        assert_eq!(p.constants.radius, 1.0);
    }

    #[test]
    fn forsaken_reference_is_interior_root() {
        let p = make_forsaken();
        let z = p.reference_solution.clone().unwrap();
        let f = p.mean_operator(&z);
        assert!(linalg::norm(&f) < 1e-14);
        assert!(p.constraint(0).value(&z) < 0.0);
        assert_abs_diff_eq!(z[0], 0.07802667, epsilon = 1e-7);
        assert_abs_diff_eq!(z[1], 0.41193385, epsilon = 1e-7);
    }

    #[test]
    fn toy_gan_rejects_zero_samples() {
        assert!(matches!(make_toy_gan(0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn toy_gan_is_seed_deterministic_and_unbiased() {
        let p = make_toy_gan(1000, 3).unwrap();
        let q = make_toy_gan(1000, 3).unwrap();
        let z = [0.3, -0.7];
        let (mut a, mut b) = ([0.0; 2], [0.0; 2]);
        let mut sa = OperatorSampler::new(11);
        let mut sb = OperatorSampler::new(11);
        sa.reseed(2);
        sb.reseed(2);
        p.eval_operator(&z, &mut sa, &mut a);
        q.eval_operator(&z, &mut sb, &mut b);
        assert_eq!(a, b);
        let mean = p.mean_operator(&z);
        assert_abs_diff_eq!(mean[0], -2.0 * 0.3 * -0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(mean[1], 0.09 - 1.0, epsilon = 1e-15);
        // 1000 samples: standard error of a χ²₁ mean is √(2/1000) ≈ 0.045
        assert!((a[0] - mean[0]).abs() < 0.2);
        assert!((a[1] - mean[1]).abs() < 0.3);
        assert_eq!(p.sample_count(), Some(1000));
    }

    #[test]
    fn quadratic_game_is_deterministic_and_skew() {
        let p = make_matrix_game_quadratic(3, 7).unwrap();
        let q = make_matrix_game_quadratic(3, 7).unwrap();
        let z = [0.1, -0.2, 0.3, 0.4, -0.5, 0.6];
        assert_eq!(p.mean_operator(&z), q.mean_operator(&z));
        assert_eq!(p.constraint(0).value(&z), q.constraint(0).value(&z));
        let w = [1.0, 0.5, -0.5, 0.0, 2.0, -1.0];
        let fz = p.mean_operator(&z);
        let fw = p.mean_operator(&w);
        let inner: f64 = (0..6).map(|i| (fz[i] - fw[i]) * (z[i] - w[i])).sum();
        assert!(inner.abs() < 1e-12);
        let GapModel::Quadratic { b, c } = &p.gap_model else { panic!("quadratic gap model") };
        assert!(b.is_symmetric(0.0));
        assert!((0.1..=10.0).contains(c));
        assert_eq!(p.dim(), 6);
    }

    #[test]
    fn quadratic_game_with_identity_payoff() {
        let p = quadratic_game_from_parts(
            Matrix::identity(1),
            vec![0.0],
            Matrix::identity(2),
            1.0,
            1.0,
            1.0,
            0,
        );
        assert_eq!(p.mean_operator(&[0.3, 0.7]), vec![0.7, -0.3]);
        assert_abs_diff_eq!(p.constants.radius, libm::sqrt(2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p.feasibility(&[2.0, 0.0]), 1.0, epsilon = 1e-15);
        assert_eq!(p.feasibility(&[0.5, 0.5]), 0.0);
    }

    #[test]
    fn simplex_game_operator() {
        let p = simplex_game_from_payoff(Matrix::from_row_major(1, 1, vec![2.0]), 0);
        assert_eq!(p.mean_operator(&[0.25, 0.75]), vec![1.5, -0.5]);
        assert_eq!(p.structure, Structure::Simplex);
        assert_eq!(p.num_constraints(), 0);
        let r = make_matrix_game_simplex(4, 2).unwrap();
        let s = make_matrix_game_simplex(4, 2).unwrap();
        let z = [0.1; 8];
        assert_eq!(r.mean_operator(&z), s.mean_operator(&z));
    }

    #[test]
    fn strongly_monotone_ball_solution_is_root() {
        let p = make_strongly_monotone_ball(3, 1.0, 5).unwrap();
        let z = p.reference_solution.clone().unwrap();
        assert!(linalg::norm(&p.mean_operator(&z)) < 1e-12);
        assert_abs_diff_eq!(linalg::norm(&z), 0.5, epsilon = 1e-15);
        assert_eq!(p.constants.strong_monotonicity, 1.0);
    }

    #[test]
    fn ball_minimization_solution() {
        let p = make_ball_minimization(vec![3.0, 4.0], 1.0).unwrap();
        let z = p.reference_solution.clone().unwrap();
        assert_abs_diff_eq!(z[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 0.8, epsilon = 1e-15);
        assert_eq!(p.mean_operator(&[1.0, 1.0]), vec![-2.0, -3.0]);
    }

    #[test]
    fn random_monotone_contains_origin() {
        let p = make_random_monotone(4, 2, 3, 0.0, 9).unwrap();
        assert_eq!(p.num_constraints(), 5);
        assert!(p.constraint_values(&[0.0; 4]).iter().all(|g| *g < 0.0));
        assert_eq!(p.structure, Structure::Generic);
    }
}
