//! The CGM main loop, the direct simplex variant, step-size schedules and
//! iterate averaging.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{self, ActiveSet};
use crate::linalg;
use crate::problems::{OperatorSampler, ProblemInstance, Structure};
use crate::qp::{self, QpOptions};

/// Step size rule `η_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `η_t = 1/(μ(t+1))`.
    InverseT { mu: f64 },
    /// `η = ln T/(μT)` for every `t`.
    LogOverT { mu: f64 },
}

impl StepSchedule {
    pub fn eta(&self, t: usize, iterations: usize) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InverseT { mu } => 1.0 / (mu * (t as f64 + 1.0)),
            StepSchedule::LogOverT { mu } => {
                let big_t = iterations as f64;
                libm::log(big_t) / (mu * big_t)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::Constant(eta) => eta > 0.0 && eta.is_finite(),
            StepSchedule::InverseT { mu } | StepSchedule::LogOverT { mu } => mu > 0.0 && mu.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid_config("step size schedule needs a positive finite parameter"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaChoice {
    Fixed(f64),
    /// Derive α from the schedule: `L_F/D` for a constant step,
    /// `μ(γ−1)/(γ+1)` for `1/(μ(t+1))`, `μ` for `ln T/(μT)`.
    FromTheorem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Averaging {
    /// `(1/T) ∑_{t<T} x_t`.
    Uniform,
    /// `(2/(T(T−1))) ∑_{t<T} t·x_t`.
    LinearWeight,
    /// `x_T`.
    Last,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StartPoint {
    /// The instance's default start, or a Gaussian sample when it has none.
    ProblemDefault,
    Given(Vec<f64>),
    /// Coordinates drawn from `N(0, 1)` with the config seed.
    Gaussian,
    /// A Gaussian sample moved into the feasible set.
    Feasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionMode {
    /// Use the closed forms the instance structure allows.
    Auto,
    /// Always solve the QP with the generic solver.
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub iterations: usize,
    pub schedule: StepSchedule,
    pub alpha: AlphaChoice,
    /// QP inexactness budget `ε`; each direction certifies `Δ ≤ ε/2`.
    pub epsilon: f64,
    pub averaging: Averaging,
    /// Adds `‖x‖² − D² ≤ 0` to the constraint system.
    pub include_aux: bool,
    /// `γ > 1`, used by the theory bounds and the second schedule.
    pub gamma: f64,
    pub seed: u64,
    pub start: StartPoint,
    pub direction: DirectionMode,
    pub qp: QpOptions,
}

impl SolverConfig {
    pub fn new(iterations: usize, eta: f64, alpha: f64) -> Self {
        Self {
            iterations,
            schedule: StepSchedule::Constant(eta),
            alpha: AlphaChoice::Fixed(alpha),
            epsilon: 1e-8,
            averaging: Averaging::Uniform,
            include_aux: false,
            gamma: 1.5,
            seed: 0,
            start: StartPoint::ProblemDefault,
            direction: DirectionMode::Auto,
            qp: QpOptions::default(),
        }
    }

    /// Constant step `D/(5L_F√(2T))`, `α = L_F/D`, uniform averaging.
    pub fn theorem1(problem: &ProblemInstance, iterations: usize) -> Result<Self> {
        let (eta, alpha) = schedule_theorem1(problem, iterations)?;
        Ok(Self::new(iterations, eta, alpha))
    }

    /// `η_t = 1/(μ(t+1))`, `α = μ(γ−1)/(γ+1)`, linear-weight averaging.
    pub fn theorem2(problem: &ProblemInstance, iterations: usize, gamma: f64) -> Result<Self> {
        let (schedule, alpha) = schedule_theorem2(problem, gamma)?;
        Ok(Self {
            schedule,
            averaging: Averaging::LinearWeight,
            gamma,
            ..Self::new(iterations, 1.0, alpha)
        })
    }

    /// `η = ln T/(μT)`, `α = μ`, last iterate.
    pub fn theorem3(problem: &ProblemInstance, iterations: usize) -> Result<Self> {
        let (eta, alpha) = schedule_theorem3(problem, iterations)?;
        Ok(Self {
            averaging: Averaging::Last,
            ..Self::new(iterations, eta, alpha)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid_config("iterations must be at least 1"));
        }
        if self.averaging == Averaging::LinearWeight && self.iterations < 2 {
            return Err(Error::invalid_config("linear-weight averaging needs at least 2 iterations"));
        }
        self.schedule.validate()?;
        if let AlphaChoice::Fixed(alpha) = self.alpha {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::invalid_config("alpha must be positive and finite"));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid_config("epsilon must be nonnegative and finite"));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::invalid_config("gamma must exceed 1"));
        }
        Ok(())
    }

    /// Resolves α against the instance constants.
    pub fn resolve_alpha(&self, problem: &ProblemInstance) -> Result<f64> {
        match (self.alpha, self.schedule) {
            (AlphaChoice::Fixed(alpha), _) => Ok(alpha),
            (AlphaChoice::FromTheorem, StepSchedule::Constant(_)) => {
                Ok(schedule_theorem1(problem, self.iterations)?.1)
            }
            (AlphaChoice::FromTheorem, StepSchedule::InverseT { .. }) => {
                Ok(schedule_theorem2(problem, self.gamma)?.1)
            }
            (AlphaChoice::FromTheorem, StepSchedule::LogOverT { .. }) => {
                Ok(schedule_theorem3(problem, self.iterations)?.1)
            }
        }
    }
}

/// `(η, α) = (D/(5L_F√(2T)), L_F/D)`.
pub fn schedule_theorem1(problem: &ProblemInstance, iterations: usize) -> Result<(f64, f64)> {
    if iterations == 0 {
        return Err(Error::invalid_config("iterations must be at least 1"));
    }
    let d = problem.constants.radius;
    let lf = problem.constants.operator_bound()?;
    if !(lf > 0.0) {
        return Err(Error::invalid_config("operator bound L_F must be positive"));
    }
    let eta = d / (5.0 * lf * libm::sqrt(2.0 * iterations as f64));
    Ok((eta, lf / d))
}

/// `(η_t = 1/(μ(t+1)), α = μ(γ−1)/(γ+1))`.
pub fn schedule_theorem2(problem: &ProblemInstance, gamma: f64) -> Result<(StepSchedule, f64)> {
    let mu = problem.constants.strong_monotonicity()?;
    if !(gamma > 1.0) {
        return Err(Error::invalid_config("gamma must exceed 1"));
    }
    Ok((StepSchedule::InverseT { mu }, mu * (gamma - 1.0) / (gamma + 1.0)))
}

/// `(η, α) = (ln T/(μT), μ)`, requiring `T ≥ max{3, κ_f}·ln T` with
/// `κ_f = ℓ_f/μ`.
pub fn schedule_theorem3(problem: &ProblemInstance, iterations: usize) -> Result<(f64, f64)> {
    let mu = problem.constants.strong_monotonicity()?;
    let lf = problem
        .constants
        .objective_smoothness
        .ok_or_else(|| Error::invalid_config("objective smoothness ℓ_f is not available"))?;
    let big_t = iterations as f64;
    let kappa = lf / mu;
    if iterations < 2 || big_t < kappa.max(3.0) * libm::log(big_t) {
        return Err(Error::invalid_config(alloc::format!(
            "T = {iterations} is too small: need T ≥ max{{3, κ_f}}·ln T with κ_f = {kappa}"
        )));
    }
    Ok((libm::log(big_t) / (mu * big_t), mu))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub eta: f64,
    pub active_count: usize,
    pub delta: f64,
    /// Constraint violation of `x_t`.
    pub feasibility: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub alpha: f64,
    pub averaging: Averaging,
    /// `x_T`.
    pub final_iterate: Vec<f64>,
    /// The configured average (or `x_T`).
    pub output: Vec<f64>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest `‖x_{t+1} − x_t − η_t v_t‖_∞` over the trace.
    pub fn max_update_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, rec) in self.records.iter().enumerate() {
            let next = self.records.get(t + 1).map_or(&self.final_iterate, |r| &r.x);
            for ((n, x), v) in next.iter().zip(&rec.x).zip(&rec.v) {
                worst = worst.max((n - x - rec.eta * v).abs());
            }
        }
        worst
    }

    /// The reported iterate after each step, as passed to observers.
    pub fn running_outputs(&self) -> Vec<Vec<f64>> {
        let Some(first) = self.records.first() else {
            return Vec::new();
        };
        let mut avg = Averager::new(self.averaging, first.x.len());
        self.records
            .iter()
            .enumerate()
            .map(|(t, rec)| {
                let next = self.records.get(t + 1).map_or(&self.final_iterate, |r| &r.x);
                avg.push(t, &rec.x, next);
                avg.current().to_vec()
            })
            .collect()
    }
}

/// What an observer sees after step `t` (that is, once `x_{t+1}` exists).
pub struct IterationInfo<'a> {
    pub t: usize,
    pub record: &'a IterationRecord,
    pub next: &'a [f64],
    /// Running average over `x_0..x_t`, or `x_{t+1}` for last-iterate output.
    pub output: &'a [f64],
}

pub trait Observer {
    fn observe(&mut self, info: &IterationInfo<'_>) -> Result<()>;
}

impl<F: FnMut(&IterationInfo<'_>) -> Result<()>> Observer for F {
    fn observe(&mut self, info: &IterationInfo<'_>) -> Result<()> {
        self(info)
    }
}

pub(crate) struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &IterationInfo<'_>) -> Result<()> {
        Ok(())
    }
}

/// Streaming form of the three averaging schemes.
pub(crate) struct Averager {
    kind: Averaging,
    sum: Vec<f64>,
    weight: f64,
    current: Vec<f64>,
}

impl Averager {
    pub(crate) fn new(kind: Averaging, dim: usize) -> Self {
        Self {
            kind,
            sum: vec![0.0; dim],
            weight: 0.0,
            current: vec![0.0; dim],
        }
    }

    pub(crate) fn push(&mut self, t: usize, x: &[f64], next: &[f64]) {
        match self.kind {
            Averaging::Last => self.current.copy_from_slice(next),
            Averaging::Uniform => {
                linalg::axpy(1.0, x, &mut self.sum);
                self.weight += 1.0;
                let w = self.weight;
                self.current.iter_mut().zip(&self.sum).for_each(|(c, s)| *c = s / w);
            }
            Averaging::LinearWeight => {
                linalg::axpy(t as f64, x, &mut self.sum);
                self.weight += t as f64;
                if self.weight == 0.0 {
                    // only x_0 seen, which carries zero weight
                    self.current.copy_from_slice(x);
                } else {
                    let w = self.weight;
                    self.current.iter_mut().zip(&self.sum).for_each(|(c, s)| *c = s / w);
                }
            }
        }
    }

    pub(crate) fn current(&self) -> &[f64] {
        &self.current
    }
}

pub(crate) fn gaussian_start(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// The start point `config` resolves to on `problem`.
pub fn resolve_start(problem: &ProblemInstance, config: &SolverConfig) -> Result<Vec<f64>> {
    let d = problem.dim();
    let x0 = match &config.start {
        StartPoint::ProblemDefault => problem
            .default_start
            .clone()
            .unwrap_or_else(|| gaussian_start(d, config.seed)),
        StartPoint::Given(x) => x.clone(),
        StartPoint::Gaussian => gaussian_start(d, config.seed),
        StartPoint::Feasible => problem.make_feasible(&gaussian_start(d, config.seed))?,
    };
    if x0.len() != d {
        return Err(Error::invalid_config(alloc::format!(
            "start point has dimension {}, expected {d}",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_config("start point must be finite"));
    }
    Ok(x0)
}

/// Sampler for stochastic operators; a pure function of the instance
/// seed and the config seed.
pub(crate) fn sampler_for(problem: &ProblemInstance, config: &SolverConfig) -> OperatorSampler {
    OperatorSampler::new(problem.sampling_seed ^ config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// One CGM direction at `x`: returns `(v, active row count, Δ)`.
pub fn cgm_direction(
    problem: &ProblemInstance,
    x: &[f64],
    fx: &[f64],
    alpha: f64,
    config: &SolverConfig,
) -> Result<(Vec<f64>, usize, f64)> {
    let radius = problem.constants.radius;
    let active: ActiveSet = geometry::active_set(problem, x, config.include_aux, radius);
    if active.is_empty() {
        return Ok((fx.iter().map(|f| -f).collect(), 0, 0.0));
    }
    let closed_form = config.direction == DirectionMode::Auto
        && problem.structure == Structure::SingleConstraint
        && active.indices.len() == 1
        && !active.aux_active;
    if closed_form {
        let i = active.indices[0];
        let mut grad = vec![0.0; x.len()];
        let g = problem.constraint(i).value_and_gradient(x, &mut grad);
        let r = qp::solve_direction_single(g, &grad, fx, alpha).map_err(|e| match e {
            Error::InfeasibleLinearization { value, .. } => Error::InfeasibleLinearization { constraint: i, value },
            other => other,
        })?;
        return Ok((r.v, 1, r.delta));
    }
    let polytope = geometry::build_polytope(problem, x, alpha, &active, radius)?;
    let r = qp::solve_direction_generic(&polytope, fx, config.epsilon, &config.qp)?;
    Ok((r.v, active.len(), r.delta))
}

/// Runs CGM for `config.iterations` steps. Simplex-structured instances
/// expose no constraint functions and always take the direct update of
/// [`simplex_cgm_run`].
pub fn cgm_run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    cgm_run_with_observer(problem, config, &mut NoObserver)
}

pub fn cgm_run_with_observer(
    problem: &ProblemInstance,
    config: &SolverConfig,
    observer: &mut dyn Observer,
) -> Result<RunTrace> {
    if problem.structure == Structure::Simplex {
        return simplex_cgm_run_with_observer(problem, config, observer);
    }
    config.validate()?;
    let alpha = config.resolve_alpha(problem)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid_config("alpha must be positive and finite"));
    }
    let x0 = resolve_start(problem, config)?;
    let mut sampler = sampler_for(problem, config);
    run_loop(problem, config, alpha, x0, observer, &mut sampler, |_, x, fx| {
        cgm_direction(problem, x, fx, alpha, config)
    })
}

/// Algorithm for the simplex `{∑z = 1, z ≥ 0}`:
/// `x_{t+1} = (1 − αη)x_t + αη·proj_v(x_t − F(x_t)/α, N_t)` with
/// `N_t = {i : x_{t,i} ≤ 0}`, i.e. `v_t = α(proj_v(…) − x_t)`.
pub fn simplex_cgm_run(problem: &ProblemInstance, config: &SolverConfig) -> Result<RunTrace> {
    simplex_cgm_run_with_observer(problem, config, &mut NoObserver)
}

pub fn simplex_cgm_run_with_observer(
    problem: &ProblemInstance,
    config: &SolverConfig,
    observer: &mut dyn Observer,
) -> Result<RunTrace> {
    if problem.structure != Structure::Simplex {
        return Err(Error::invalid_config("simplex CGM needs a simplex-structured instance"));
    }
    config.validate()?;
    let alpha = config.resolve_alpha(problem)?;
    let x0 = resolve_start(problem, config)?;
    let mut sampler = sampler_for(problem, config);
    run_loop(problem, config, alpha, x0, observer, &mut sampler, |_, x, fx| {
        Ok(simplex_direction(x, fx, alpha))
    })
}

/// `v = α(proj_v(x − F/α, N) − x)` and `|N|`.
pub fn simplex_direction(x: &[f64], fx: &[f64], alpha: f64) -> (Vec<f64>, usize, f64) {
    let restricted: Vec<usize> = (0..x.len()).filter(|&i| x[i] <= 0.0).collect();
    let q: Vec<f64> = x.iter().zip(fx).map(|(xi, fi)| xi - fi / alpha).collect();
    let p = geometry::proj_v(&q, &restricted);
    let v = p.iter().zip(x).map(|(pi, xi)| alpha * (pi - xi)).collect();
    (v, restricted.len(), 0.0)
}

/// Shared driver: `direction(t, x_t, F(x_t))` returns `(v_t, |I|, Δ_t)`.
pub(crate) fn run_loop(
    problem: &ProblemInstance,
    config: &SolverConfig,
    alpha: f64,
    x0: Vec<f64>,
    observer: &mut dyn Observer,
    sampler: &mut OperatorSampler,
    mut direction: impl FnMut(usize, &[f64], &[f64]) -> Result<(Vec<f64>, usize, f64)>,
) -> Result<RunTrace> {
    let d = problem.dim();
    let big_t = config.iterations;
    let mut records = Vec::with_capacity(big_t);
    let mut avg = Averager::new(config.averaging, d);
    let mut x = x0;
    let mut fx = vec![0.0; d];
    for t in 0..big_t {
        sampler.reseed(t as u64);
        problem.eval_operator(&x, sampler, &mut fx);
        let (v, active_count, delta) = direction(t, &x, &fx).map_err(|e| e.at_iteration(t))?;
        if v.iter().any(|vi| !vi.is_finite()) {
            return Err(Error::NonFinite { quantity: "direction" }.at_iteration(t));
        }
        let eta = config.schedule.eta(t, big_t);
        let mut next = x.clone();
        linalg::axpy(eta, &v, &mut next);
        if next.iter().any(|xi| !xi.is_finite()) {
            return Err(Error::NonFinite { quantity: "iterate" }.at_iteration(t));
        }
        let record = IterationRecord {
            t,
            feasibility: problem.feasibility(&x),
            x,
            v,
            eta,
            active_count,
            delta,
        };
        avg.push(t, &record.x, &next);
        observer
            .observe(&IterationInfo {
                t,
                record: &record,
                next: &next,
                output: avg.current(),
            })
            .map_err(|e| e.at_iteration(t))?;
        records.push(record);
        x = next;
    }
    Ok(RunTrace {
        records,
        alpha,
        averaging: config.averaging,
        output: avg.current().to_vec(),
        final_iterate: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        make_matrix_game_simplex, BallConstraint, FnConstraint, Operator, ProblemConstants,
    };
    use alloc::boxed::Box;
    use approx::assert_abs_diff_eq;

    fn one_dim() -> ProblemInstance {
        ProblemInstance::builder(
            "1d",
            1,
            Operator::Deterministic(Box::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(x))),
        )
        .constraint(FnConstraint::new(|x: &[f64]| x[0] * x[0] - 1.0, |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0]
        }))
        .structure(Structure::SingleConstraint)
        .build()
        .unwrap()
    }

    #[test]
    fn one_dimensional_plain_step() {
        let p = one_dim();
        let cfg = SolverConfig {
            start: StartPoint::Given(vec![0.5]),
            ..SolverConfig::new(1, 0.1, 1.0)
        };
        let trace = cgm_run(&p, &cfg).unwrap();
        assert_abs_diff_eq!(trace.final_iterate[0], 0.45, epsilon = 1e-15);
        assert_eq!(trace.records[0].active_count, 0);
    }

    #[test]
    fn boundary_step_stays_on_tangent() {
        // x = 1 on g = x² − 1 with F = x pushing outward... F points inward
        // here, so use F = −1 to push out and check the velocity is clipped
        let p = ProblemInstance::builder(
            "push",
            1,
            Operator::Deterministic(Box::new(|_: &[f64], out: &mut [f64]| out[0] = -1.0)),
        )
        .constraint(BallConstraint::centered(1, 1.0))
        .structure(Structure::SingleConstraint)
        .build()
        .unwrap();
        let cfg = SolverConfig {
            start: StartPoint::Given(vec![1.0]),
            ..SolverConfig::new(1, 0.1, 1.0)
        };
        let trace = cgm_run(&p, &cfg).unwrap();
        assert_abs_diff_eq!(trace.records[0].v[0], 0.0, epsilon = 1e-15);
        assert_eq!(trace.records[0].active_count, 1);
    }

    #[test]
    fn linear_weight_average_example() {
        let mut avg = Averager::new(Averaging::LinearWeight, 1);
        avg.push(0, &[0.0], &[1.0]);
        avg.push(1, &[1.0], &[2.0]);
        avg.push(2, &[2.0], &[3.0]);
        assert_abs_diff_eq!(avg.current()[0], 5.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_and_last_averages() {
        let mut u = Averager::new(Averaging::Uniform, 1);
        let mut l = Averager::new(Averaging::Last, 1);
        for (t, x) in [0.0, 1.0, 2.0].iter().enumerate() {
            u.push(t, &[*x], &[x + 1.0]);
            l.push(t, &[*x], &[x + 1.0]);
        }
        assert_abs_diff_eq!(u.current()[0], 1.0);
        assert_abs_diff_eq!(l.current()[0], 3.0);
    }

    fn constants_problem(lf: f64, radius: f64, mu: f64, lsmooth: Option<f64>) -> ProblemInstance {
        ProblemInstance::builder(
            "c",
            1,
            Operator::Deterministic(Box::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(x))),
        )
        .constants(ProblemConstants {
            operator_bound: Some(lf),
            strong_monotonicity: mu,
            objective_smoothness: lsmooth,
            ..ProblemConstants::with_radius(radius)
        })
        .constraint(BallConstraint::centered(1, radius))
        .build()
        .unwrap()
    }

    #[test]
    fn theorem1_schedule_examples() {
        let p = constants_problem(1.0, 1.0, 0.0, None);
        let (eta, alpha) = schedule_theorem1(&p, 2).unwrap();
        assert_abs_diff_eq!(eta, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(alpha, 1.0);
        for t in [1, 7, 100, 10_000] {
            let (eta, alpha) = schedule_theorem1(&p, t).unwrap();
            assert!(alpha * eta < 0.2);
        }
        let (e1, _) = schedule_theorem1(&p, 100).unwrap();
        let (e4, _) = schedule_theorem1(&p, 400).unwrap();
        assert_abs_diff_eq!(e4, e1 / 2.0, epsilon = 1e-15);

        let mut missing = constants_problem(1.0, 1.0, 0.0, None);
        missing.constants.operator_bound = None;
        assert!(matches!(schedule_theorem1(&missing, 4), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn theorem2_schedule_examples() {
        let p = constants_problem(1.0, 1.0, 1.0, None);
        let (sched, alpha) = schedule_theorem2(&p, 3.0).unwrap();
        assert_abs_diff_eq!(sched.eta(0, 10), 1.0);
        assert_abs_diff_eq!(alpha, 0.5);
        for t in 0..50 {
            assert!(alpha * sched.eta(t, 50) <= 0.5 + 1e-15);
            assert!(sched.eta(t + 1, 50) < sched.eta(t, 50));
        }
        let flat = constants_problem(1.0, 1.0, 0.0, None);
        assert!(schedule_theorem2(&flat, 3.0).is_err());
    }

    #[test]
    fn theorem3_schedule_examples() {
        let p = constants_problem(1.0, 1.0, 1.0, Some(1.0));
        let (eta, alpha) = schedule_theorem3(&p, 8).unwrap();
        assert_abs_diff_eq!(eta, libm::log(8.0) / 8.0, epsilon = 1e-15);
        assert_eq!(alpha, 1.0);
        let ill = constants_problem(1.0, 1.0, 1.0, Some(50.0));
        assert!(matches!(schedule_theorem3(&ill, 64), Err(Error::InvalidConfig(_))));
        assert!(matches!(schedule_theorem3(&p, 3), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0, 0.1, 1.0).validate().is_err());
        assert!(SolverConfig::new(5, 0.0, 1.0).validate().is_err());
        assert!(SolverConfig::new(5, 0.1, -1.0).validate().is_err());
        let lw = SolverConfig {
            averaging: Averaging::LinearWeight,
            ..SolverConfig::new(1, 0.1, 1.0)
        };
        assert!(lw.validate().is_err());
    }

    #[test]
    fn simplex_fixed_point_and_tangent_step() {
        let x = [0.2, 0.3, 0.5];
        let (v, n, _) = simplex_direction(&x, &[0.0; 3], 2.0);
        assert_eq!(n, 0);
        assert!(linalg::max_abs(&v) < 1e-15);

        let f = [1.0, -0.5, 0.2];
        let (alpha, eta) = (2.0, 0.1);
        let (v, _, _) = simplex_direction(&x, &f, alpha);
        let mean: f64 = f.iter().sum::<f64>() / 3.0;
        for i in 0..3 {
            let expect = x[i] - eta * f[i] + eta * mean;
            assert_abs_diff_eq!(x[i] + eta * v[i], expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn simplex_sum_residual_contracts() {
        let p = make_matrix_game_simplex(4, 3).unwrap();
        let cfg = SolverConfig {
            start: StartPoint::Gaussian,
            seed: 11,
            ..SolverConfig::new(30, 0.05, 4.0)
        };
        let trace = simplex_cgm_run(&p, &cfg).unwrap();
        let rate: f64 = 1.0 - 0.2;
        let r0 = trace.records[0].x.iter().sum::<f64>() - 1.0;
        for rec in &trace.records {
            let r = rec.x.iter().sum::<f64>() - 1.0;
            assert!(r.abs() <= libm::pow(rate, rec.t as f64) * r0.abs() + 1e-12);
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let p = make_matrix_game_simplex(3, 5).unwrap();
        let cfg = SolverConfig {
            start: StartPoint::Gaussian,
            seed: 4,
            ..SolverConfig::new(20, 0.05, 2.0)
        };
        let a = cgm_run(&p, &cfg).unwrap();
        let b = cgm_run(&p, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.max_update_residual() < 1e-12);
        assert_eq!(a.running_outputs().last().unwrap(), &a.output);
    }

    #[test]
    fn errors_carry_iteration() {
        // g = x² + 1 is never satisfiable and the gradient vanishes at 0
        let p = ProblemInstance::builder(
            "bad",
            1,
            Operator::Deterministic(Box::new(|_: &[f64], out: &mut [f64]| out[0] = 0.0)),
        )
        .constraint(FnConstraint::new(|x: &[f64]| x[0] * x[0] + 1.0, |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0]
        }))
        .structure(Structure::SingleConstraint)
        .build()
        .unwrap();
        let cfg = SolverConfig {
            start: StartPoint::Given(vec![0.0]),
            ..SolverConfig::new(3, 0.1, 1.0)
        };
        let err = cgm_run(&p, &cfg).unwrap_err();
        assert!(matches!(err, Error::AtIteration { iteration: 0, .. }));
        assert!(matches!(err.root(), Error::InfeasibleLinearization { constraint: 0, .. }));
    }
}
