//! JSON problem descriptors: generator name plus its parameters, enough to
//! rebuild an instance bit-identically.

use cgm_core::problems::{self, ConstantsSource, ProblemConstants, ProblemInstance};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Forsaken,
    ToyGan,
    QuadGame,
    SimplexGame,
    StronglyMonotoneBall,
    BallMinimization,
    RandomMonotone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDescriptor {
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balls: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl ProblemDescriptor {
    pub fn new(generator: Generator) -> Self {
        Self {
            generator,
            d: None,
            seed: None,
            sample_count: None,
            mu: None,
            balls: None,
            halfspaces: None,
            target: None,
            radius: None,
        }
    }

    pub fn with_dim_seed(generator: Generator, d: usize, seed: u64) -> Self {
        Self {
            d: Some(d),
            seed: Some(seed),
            ..Self::new(generator)
        }
    }

    fn need_d(&self) -> CliResult<usize> {
        match self.d {
            Some(0) => Err(CliError::config("problem.d must be at least 1")),
            Some(d) => Ok(d),
            None => Err(CliError::config(format!("problem.d is required for {:?}", self.generator))),
        }
    }

    fn need_seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::config(format!("problem.seed is required for {:?}", self.generator)))
    }

    pub fn build(&self) -> CliResult<ProblemInstance> {
        let core = |e: cgm_core::Error| CliError::config(format!("problem: {e}"));
        match self.generator {
            Generator::Forsaken => Ok(problems::make_forsaken()),
            Generator::ToyGan => {
                problems::make_toy_gan(self.sample_count.unwrap_or(1000), self.need_seed()?).map_err(core)
            }
            Generator::QuadGame => {
                problems::make_matrix_game_quadratic(self.need_d()?, self.need_seed()?).map_err(core)
            }
            Generator::SimplexGame => {
                problems::make_matrix_game_simplex(self.need_d()?, self.need_seed()?).map_err(core)
            }
            Generator::StronglyMonotoneBall => problems::make_strongly_monotone_ball(
                self.need_d()?,
                self.mu.unwrap_or(1.0),
                self.need_seed()?,
            )
            .map_err(core),
            Generator::BallMinimization => {
                let target = self
                    .target
                    .clone()
                    .ok_or_else(|| CliError::config("problem.target is required for ball_minimization"))?;
                problems::make_ball_minimization(target, self.radius.unwrap_or(1.0)).map_err(core)
            }
            Generator::RandomMonotone => problems::make_random_monotone(
                self.need_d()?,
                self.balls.unwrap_or(2),
                self.halfspaces.unwrap_or(2),
                self.mu.unwrap_or(0.0),
                self.need_seed()?,
            )
            .map_err(core),
        }
    }
}

/// The instance constants as JSON, for run summaries.
pub fn constants_json(c: &ProblemConstants) -> Value {
    json!({
        "D": c.radius,
        "L_F": c.operator_bound,
        "L_g": c.constraint_lipschitz,
        "l_g": c.constraint_smoothness,
        "mu": c.strong_monotonicity,
        "l_f": c.objective_smoothness,
        "L_f": c.objective_lipschitz,
        "source": match c.source {
            ConstantsSource::Analytic => "analytic",
            ConstantsSource::Empirical => "empirical",
        },
    })
}
