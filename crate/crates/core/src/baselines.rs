//! Projection-based reference solvers: projected gradient, which on a
//! saddle operator is gradient descent ascent.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry;
use crate::problems::{FeasibleShape, ProblemInstance, Structure};
use crate::solver::{self, NoObserver, Observer, RunTrace, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProjectionOracle {
    Ball { radius: f64 },
    Simplex,
}

impl ProjectionOracle {
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        match *self {
            ProjectionOracle::Ball { radius } => geometry::project_ball(y, radius),
            ProjectionOracle::Simplex => geometry::project_simplex(y),
        }
    }

    /// The oracle matching the instance's feasible set, if it has one.
    pub fn for_problem(problem: &ProblemInstance) -> Option<Self> {
        match problem.feasible_shape {
            Some(FeasibleShape::Ball { radius }) => Some(ProjectionOracle::Ball { radius }),
            Some(FeasibleShape::Simplex) => Some(ProjectionOracle::Simplex),
            None if problem.structure == Structure::Simplex => Some(ProjectionOracle::Simplex),
            None => None,
        }
    }

    fn check(&self, problem: &ProblemInstance) -> Result<()> {
        let consistent = match (Self::for_problem(problem), *self) {
            (Some(ProjectionOracle::Ball { radius: r }), ProjectionOracle::Ball { radius }) => {
                (r - radius).abs() <= 1e-12 * r.max(1.0)
            }
            (Some(ProjectionOracle::Simplex), ProjectionOracle::Simplex) => true,
            _ => false,
        };
        if consistent {
            Ok(())
        } else {
            Err(Error::invalid_config(alloc::format!(
                "projection oracle {self:?} does not match the feasible set of {}",
                problem.name
            )))
        }
    }
}

/// `x_{t+1} = Π(x_t − η_t F(x_t))`.
///
/// The trace has the CGM schema: `v_t = (x_{t+1} − x_t)/η_t` is the
/// effective velocity, `active_count` counts the constraints active at
/// `x_t`, and `Δ_t = 0`. The config's α is ignored and the trace reports α = 0.
pub fn pgm_run(problem: &ProblemInstance, oracle: ProjectionOracle, config: &SolverConfig) -> Result<RunTrace> {
    pgm_run_with_observer(problem, oracle, config, &mut NoObserver)
}

pub fn pgm_run_with_observer(
    problem: &ProblemInstance,
    oracle: ProjectionOracle,
    config: &SolverConfig,
    observer: &mut dyn Observer,
) -> Result<RunTrace> {
    oracle.check(problem)?;
    let config = SolverConfig {
        alpha: solver::AlphaChoice::Fixed(1.0),
        ..config.clone()
    };
    config.validate()?;
    let x0 = solver::resolve_start(problem, &config)?;
    let mut sampler = solver::sampler_for(problem, &config);
    let big_t = config.iterations;
    let schedule = config.schedule;
    let radius = problem.constants.radius;
    let mut trace = solver::run_loop(problem, &config, 1.0, x0, observer, &mut sampler, |t, x, fx| {
        let eta = schedule.eta(t, big_t);
        let y: Vec<f64> = x.iter().zip(fx).map(|(xi, fi)| xi - eta * fi).collect();
        let p = oracle.project(&y);
        let v = p.iter().zip(x).map(|(pi, xi)| (pi - xi) / eta).collect();
        let active = match oracle {
            ProjectionOracle::Simplex => x.iter().filter(|v| **v <= 0.0).count(),
            ProjectionOracle::Ball { .. } => geometry::active_set(problem, x, false, radius).len(),
        };
        Ok((v, active, 0.0))
    })?;
    trace.alpha = 0.0;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::problems::{make_matrix_game_simplex, make_strongly_monotone_ball, BallConstraint, Operator};
    use crate::solver::StartPoint;
    use alloc::boxed::Box;
    use alloc::vec;

    fn ball_identity() -> ProblemInstance {
        ProblemInstance::builder(
            "ball",
            2,
            Operator::Deterministic(Box::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(x))),
        )
        .constraint(BallConstraint::centered(2, 1.0))
        .feasible_shape(FeasibleShape::Ball { radius: 1.0 })
        .build()
        .unwrap()
    }

    #[test]
    fn ball_hand_example() {
        let p = ball_identity();
        let cfg = SolverConfig {
            start: StartPoint::Given(vec![2.0, 0.0]),
            ..SolverConfig::new(1, 0.5, 1.0)
        };
        let trace = pgm_run(&p, ProjectionOracle::Ball { radius: 1.0 }, &cfg).unwrap();
        assert!(linalg::max_abs_diff(&trace.final_iterate, &[1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn zero_operator_projects_once_then_stays() {
        let p = ProblemInstance::builder(
            "zero",
            2,
            Operator::Deterministic(Box::new(|_: &[f64], out: &mut [f64]| out.fill(0.0))),
        )
        .constraint(BallConstraint::centered(2, 1.0))
        .feasible_shape(FeasibleShape::Ball { radius: 1.0 })
        .build()
        .unwrap();
        let cfg = SolverConfig {
            start: StartPoint::Given(vec![3.0, 4.0]),
            ..SolverConfig::new(3, 0.1, 1.0)
        };
        let trace = pgm_run(&p, ProjectionOracle::Ball { radius: 1.0 }, &cfg).unwrap();
        for rec in &trace.records[1..] {
            assert!(p.feasibility(&rec.x) <= 1e-12);
            assert!(linalg::max_abs(&rec.v) < 1e-12);
        }
    }

    #[test]
    fn simplex_gda_iterates_are_feasible() {
        let p = make_matrix_game_simplex(5, 2).unwrap();
        let cfg = SolverConfig {
            start: StartPoint::Gaussian,
            seed: 9,
            ..SolverConfig::new(40, 0.05, 1.0)
        };
        let trace = pgm_run(&p, ProjectionOracle::Simplex, &cfg).unwrap();
        for rec in &trace.records[1..] {
            assert!(p.feasibility(&rec.x) <= 1e-10);
        }
        assert!(trace.max_update_residual() < 1e-12);
    }

    #[test]
    fn mismatched_oracle_is_rejected() {
        let p = make_strongly_monotone_ball(2, 1.0, 1).unwrap();
        let cfg = SolverConfig::new(2, 0.1, 1.0);
        assert!(matches!(pgm_run(&p, ProjectionOracle::Simplex, &cfg), Err(Error::InvalidConfig(_))));
        assert!(matches!(
            pgm_run(&p, ProjectionOracle::Ball { radius: 2.0 }, &cfg),
            Err(Error::InvalidConfig(_))
        ));
        assert!(pgm_run(&p, ProjectionOracle::Ball { radius: 1.0 }, &cfg).is_ok());
    }
}
