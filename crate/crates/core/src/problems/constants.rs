use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::functions::ConstraintFn;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantsSource {
    /// Closed-form bounds (possibly through a power-iteration norm).
    Analytic,
    /// Sampled maxima with a safety margin.
    Empirical,
}

/// Problem constants used by step-size schedules and theory bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConstants {
    /// `D`: radius of a ball containing the feasible set.
    pub radius: f64,
    /// `L_F`: bound on `‖F(x)‖`.
    pub operator_bound: Option<f64>,
    /// `L_g`: Lipschitz constant of every `g_i`.
    pub constraint_lipschitz: Option<f64>,
    /// `ℓ_g`: smoothness of every `g_i`.
    pub constraint_smoothness: Option<f64>,
    /// `μ ≥ 0`; zero means merely monotone.
    pub strong_monotonicity: f64,
    /// `ℓ_f` for minimization instances.
    pub objective_smoothness: Option<f64>,
    /// `L_f` for minimization instances.
    pub objective_lipschitz: Option<f64>,
    pub source: ConstantsSource,
}

impl ProblemConstants {
    pub fn with_radius(radius: f64) -> Self {
        Self {
            radius,
            operator_bound: None,
            constraint_lipschitz: None,
            constraint_smoothness: None,
            strong_monotonicity: 0.0,
            objective_smoothness: None,
            objective_lipschitz: None,
            source: ConstantsSource::Analytic,
        }
    }

    pub fn operator_bound(&self) -> Result<f64> {
        self.operator_bound
            .ok_or_else(|| Error::invalid_config("operator bound L_F is not available"))
    }

    pub fn constraint_lipschitz(&self) -> Result<f64> {
        self.constraint_lipschitz
            .ok_or_else(|| Error::invalid_config("constraint Lipschitz constant L_g is not available"))
    }

    pub fn constraint_smoothness(&self) -> Result<f64> {
        self.constraint_smoothness
            .ok_or_else(|| Error::invalid_config("constraint smoothness ℓ_g is not available"))
    }

    pub fn strong_monotonicity(&self) -> Result<f64> {
        if self.strong_monotonicity > 0.0 {
            Ok(self.strong_monotonicity)
        } else {
            Err(Error::invalid_config("strong monotonicity μ > 0 is required"))
        }
    }

    /// Constraint constants over `[m+1]` once the auxiliary constraint
    /// `‖x‖² − D²` joins: on the ball of radius `2D` its gradient is bounded
    /// by `4D` and its Hessian is `2I`.
    pub fn including_aux(&self) -> Self {
        let mut out = self.clone();
        let aux_lipschitz = 4.0 * self.radius;
        out.constraint_lipschitz = Some(self.constraint_lipschitz.unwrap_or(0.0).max(aux_lipschitz));
        out.constraint_smoothness = Some(self.constraint_smoothness.unwrap_or(0.0).max(2.0));
        out
    }
}

/// Uniform sample in the ball `{‖x‖ ≤ radius}`.
pub(crate) fn sample_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = linalg::norm(&x);
    let u: f64 = rng.random();
    let r = radius * libm::pow(u, 1.0 / dim as f64);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v *= r / n);
    }
    x
}

/// Estimates `L_F`, `L_g` and `ℓ_g` by sampling `samples` points in the
/// ball of the given radius and inflating the observed maxima by `margin`.
///
/// `ℓ_g` is estimated from difference quotients over nearby pairs.
pub fn estimate_constants(
    dim: usize,
    operator: impl Fn(&[f64], &mut [f64]),
    constraints: &[&dyn ConstraintFn],
    radius: f64,
    samples: usize,
    margin: f64,
    seed: u64,
) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fx = vec![0.0; dim];
    let mut g1 = vec![0.0; dim];
    let mut g2 = vec![0.0; dim];
    let (mut lf, mut lg, mut sg) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let x = sample_in_ball(&mut rng, dim, radius);
        operator(&x, &mut fx);
        lf = lf.max(linalg::norm(&fx));
        let step = sample_in_ball(&mut rng, dim, 0.1 * radius);
        let y: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
        let dist = linalg::norm(&step);
        for g in constraints {
            g.value_and_gradient(&x, &mut g1);
            lg = lg.max(linalg::norm(&g1));
            if dist > 0.0 {
                g.value_and_gradient(&y, &mut g2);
                sg = sg.max(linalg::distance(&g1, &g2) / dist);
            }
        }
    }
    (margin * lf, margin * lg, margin * sg)
}
