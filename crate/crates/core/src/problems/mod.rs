//! Constrained variational inequality instances.
//!
//! A [`ProblemInstance`] bundles an operator `F : ℝ^d → ℝ^d`, a list of
//! convex constraint functions `g_i(x) ≤ 0`, and the problem constants the
//! step-size schedules need. Generators for the benchmark games live in
//! [`generators`]; structural self-checks live in [`probe`].

mod constants;
mod functions;
pub mod generators;
pub mod probe;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use constants::{estimate_constants, ConstantsSource, ProblemConstants};
pub use functions::{
    BallConstraint, ConstraintFn, FnConstraint, HalfSpace, ObjectiveFn, QuadraticConstraint,
    StochasticField, VectorField,
};
pub use generators::{
    make_ball_minimization, make_forsaken, make_matrix_game_quadratic, make_matrix_game_simplex,
    make_random_monotone, make_strongly_monotone_ball, make_toy_gan,
};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Which fast path the direction subproblem admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    Generic,
    /// Exactly one functional constraint; the closed-form direction applies.
    SingleConstraint,
    /// The feasible set is the standard simplex `{∑z = 1, z ≥ 0}`, encoded
    /// implicitly (no exposed constraint functions).
    Simplex,
}

/// Feasible sets with a cheap exact projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeasibleShape {
    Ball { radius: f64 },
    Simplex,
}

/// Per-instance data the gap evaluators need.
#[derive(Clone, Debug)]
pub enum GapModel {
    /// Single constraint `½ zᵀBz − c ≤ 0`.
    Quadratic { b: Matrix, c: f64 },
    /// Bilinear game `xᵀAy` over the joint simplex.
    SimplexGame { payoff: Matrix },
    /// Only a reference solution is known.
    Reference,
    None,
}

pub type SaddleFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The saddle or minimization function the operator derives from, used to
/// cross-check `F` by finite differences.
pub enum Potential {
    /// `F = ∇f`.
    Minimize(Box<dyn ObjectiveFn>),
    /// `F = (∇ₓφ, −∇ᵧφ)` for `min_x max_y φ(x, y)` with `x = z[..split]`.
    Saddle {
        value: SaddleFn,
        split: usize,
    },
}

impl Potential {
    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            Potential::Minimize(f) => f.value(z),
            Potential::Saddle { value, .. } => value(z),
        }
    }

    /// Converts a gradient of the potential into the operator sign convention.
    pub fn operator_from_gradient(&self, grad: &mut [f64]) {
        if let Potential::Saddle { split, .. } = self {
            grad[*split..].iter_mut().for_each(|g| *g = -*g);
        }
    }
}

pub enum Operator {
    Deterministic(Box<dyn VectorField>),
    Stochastic {
        field: Box<dyn StochasticField>,
        sample_count: usize,
    },
}

/// Random state for stochastic operators.
///
/// The stream is a pure function of `(seed, iteration)`: [`reseed`] jumps to
/// the stream for an iteration so a run can be replayed from its seed alone.
///
/// [`reseed`]: OperatorSampler::reseed
#[derive(Clone, Debug)]
pub struct OperatorSampler {
    seed: u64,
    rng: ChaCha8Rng,
}

impl OperatorSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn reseed(&mut self, iteration: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.rng.set_stream(iteration);
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// A constrained variational inequality: find `x* ∈ C` with
/// `F(x*)ᵀ(x* − x) ≤ 0` for all `x ∈ C = {x : g_i(x) ≤ 0}`.
pub struct ProblemInstance {
    pub name: String,
    dim: usize,
    operator: Operator,
    constraints: Vec<Box<dyn ConstraintFn>>,
    pub constants: ProblemConstants,
    pub structure: Structure,
    pub reference_solution: Option<Vec<f64>>,
    pub default_start: Option<Vec<f64>>,
    pub potential: Option<Potential>,
    pub feasible_shape: Option<FeasibleShape>,
    pub gap_model: GapModel,
    /// Whether `F` is monotone on ℝ^d (the monotonicity probe applies).
    pub monotone: bool,
    /// Base seed of a stochastic operator's sampler.
    pub sampling_seed: u64,
}

impl core::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("constraints", &self.constraints.len())
            .field("structure", &self.structure)
            .field("constants", &self.constants)
            .finish_non_exhaustive()
    }
}

impl ProblemInstance {
    /// Starts assembling an instance.
    pub fn builder(name: impl Into<String>, dim: usize, operator: Operator) -> ProblemBuilder {
        ProblemBuilder {
            instance: ProblemInstance {
                name: name.into(),
                dim,
                operator,
                constraints: Vec::new(),
                constants: ProblemConstants::with_radius(1.0),
                structure: Structure::Generic,
                reference_solution: None,
                default_start: None,
                potential: None,
                feasible_shape: None,
                gap_model: GapModel::None,
                monotone: false,
                sampling_seed: 0,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraint(&self, i: usize) -> &dyn ConstraintFn {
        self.constraints[i].as_ref()
    }

    pub fn constraints(&self) -> impl Iterator<Item = &dyn ConstraintFn> {
        self.constraints.iter().map(|c| c.as_ref())
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self.operator, Operator::Stochastic { .. })
    }

    pub fn sample_count(&self) -> Option<usize> {
        match &self.operator {
            Operator::Stochastic { sample_count, .. } => Some(*sample_count),
            Operator::Deterministic(_) => None,
        }
    }

    /// Evaluates `F(x)`; stochastic operators draw from `sampler`.
    pub fn eval_operator(&self, x: &[f64], sampler: &mut OperatorSampler, out: &mut [f64]) {
        match &self.operator {
            Operator::Deterministic(f) => f.apply(x, out),
            Operator::Stochastic { field, .. } => field.sample(x, sampler.rng(), out),
        }
    }

    /// Evaluates `F(x)` exactly, or its infinite-sample limit for stochastic
    /// operators.
    pub fn eval_mean_operator(&self, x: &[f64], out: &mut [f64]) {
        match &self.operator {
            Operator::Deterministic(f) => f.apply(x, out),
            Operator::Stochastic { field, .. } => field.mean(x, out),
        }
    }

    pub fn mean_operator(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_mean_operator(x, &mut out);
        out
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|g| g.value(x)).collect()
    }

    /// Constraint violation: `max_i max{0, g_i(x)}`, or for the simplex
    /// structure `max{0, max_i(−x_i), |∑x_i − 1|}`.
    pub fn feasibility(&self, x: &[f64]) -> f64 {
        let mut worst = match self.structure {
            Structure::Simplex => simplex_violation(x),
            _ => 0.0,
        };
        for g in &self.constraints {
            worst = worst.max(g.value(x));
        }
        worst.max(0.0)
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.feasibility(x) == 0.0
    }

    /// Moves `x` into the feasible set: simplex projection, ball projection,
    /// or the largest radial shrink `s·x` (s ∈ [0,1]) that is feasible, which
    /// needs the origin to be strictly feasible.
    pub fn make_feasible(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.feasible_shape {
            Some(FeasibleShape::Simplex) => return Ok(crate::geometry::project_simplex(x)),
            Some(FeasibleShape::Ball { radius }) => {
                return Ok(crate::geometry::project_ball(x, radius))
            }
            None => {}
        }
        if self.structure == Structure::Simplex {
            return Ok(crate::geometry::project_simplex(x));
        }
        if self.is_feasible(x) {
            return Ok(x.to_vec());
        }
        let origin = vec![0.0; self.dim];
        if self.constraints.iter().any(|g| g.value(&origin) >= 0.0) {
            return Err(Error::invalid_argument(
                "radial feasible start needs a strictly feasible origin",
            ));
        }
        let scaled = |s: f64| x.iter().map(|v| s * v).collect::<Vec<_>>();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.is_feasible(&scaled(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(scaled(lo))
    }
}

pub(crate) fn simplex_violation(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().sum();
    let neg = x.iter().fold(0.0, |m: f64, v| m.max(-v));
    neg.max((sum - 1.0).abs())
}

pub struct ProblemBuilder {
    instance: ProblemInstance,
}

impl ProblemBuilder {
    pub fn constraint(mut self, g: impl ConstraintFn + 'static) -> Self {
        self.instance.constraints.push(Box::new(g));
        self
    }

    pub fn boxed_constraint(mut self, g: Box<dyn ConstraintFn>) -> Self {
        self.instance.constraints.push(g);
        self
    }

    pub fn constants(mut self, constants: ProblemConstants) -> Self {
        self.instance.constants = constants;
        self
    }

    pub fn structure(mut self, structure: Structure) -> Self {
        self.instance.structure = structure;
        self
    }

    pub fn reference_solution(mut self, x: Vec<f64>) -> Self {
        self.instance.reference_solution = Some(x);
        self
    }

    pub fn default_start(mut self, x: Vec<f64>) -> Self {
        self.instance.default_start = Some(x);
        self
    }

    pub fn potential(mut self, p: Potential) -> Self {
        self.instance.potential = Some(p);
        self
    }

    pub fn feasible_shape(mut self, shape: FeasibleShape) -> Self {
        self.instance.feasible_shape = Some(shape);
        self
    }

    pub fn gap_model(mut self, model: GapModel) -> Self {
        self.instance.gap_model = model;
        self
    }

    pub fn monotone(mut self, monotone: bool) -> Self {
        self.instance.monotone = monotone;
        self
    }

    pub fn sampling_seed(mut self, seed: u64) -> Self {
        self.instance.sampling_seed = seed;
        self
    }

    pub fn build(self) -> Result<ProblemInstance> {
        let p = self.instance;
        if p.dim == 0 {
            return Err(Error::invalid_argument("dimension must be at least 1"));
        }
        match p.structure {
            Structure::Simplex => {}
            Structure::SingleConstraint if p.constraints.len() != 1 => {
                return Err(Error::invalid_argument(
                    "single-constraint structure needs exactly one constraint",
                ))
            }
            _ if p.constraints.is_empty() => {
                return Err(Error::invalid_argument("at least one constraint is required"))
            }
            _ => {}
        }
        if !(p.constants.radius > 0.0) {
            return Err(Error::invalid_argument("radius D must be positive"));
        }
        if p.constants.strong_monotonicity < 0.0 {
            return Err(Error::invalid_argument("strong monotonicity modulus must be ≥ 0"));
        }
        for x in [&p.reference_solution, &p.default_start].into_iter().flatten() {
            if x.len() != p.dim {
                return Err(Error::invalid_argument("point dimension mismatch"));
            }
        }
        Ok(p)
    }
}

/// Wraps the gradient of `f` as the operator `F = ∇f`, turning a
/// constrained minimization problem into a variational inequality.
pub fn gradient_operator<F: ObjectiveFn + Clone + 'static>(f: F) -> (Operator, Potential) {
    let op = f.clone();
    (
        Operator::Deterministic(Box::new(move |x: &[f64], out: &mut [f64]| op.gradient(x, out))),
        Potential::Minimize(Box::new(f)),
    )
}

/// Euclidean norm of `F(x)` at its infinite-sample limit.
pub fn operator_norm_at(problem: &ProblemInstance, x: &[f64]) -> f64 {
    linalg::norm(&problem.mean_operator(x))
}
