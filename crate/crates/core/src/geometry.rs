//! Active sets, velocity polytopes, and the projection oracles.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::problems::ProblemInstance;

/// Constraints with `g_i(x) ≥ 0` at the queried point. The boundary counts
/// as active.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActiveSet {
    /// Sorted constraint indices.
    pub indices: Vec<usize>,
    /// Whether the auxiliary constraint `‖x‖² − D² ≥ 0` is active.
    pub aux_active: bool,
}

impl ActiveSet {
    /// Builds the set from precomputed constraint values.
    pub fn from_values(values: &[f64], aux_value: Option<f64>) -> Self {
        Self {
            indices: values
                .iter()
                .enumerate()
                .filter(|(_, g)| **g >= 0.0)
                .map(|(i, _)| i)
                .collect(),
            aux_active: aux_value.is_some_and(|a| a >= 0.0),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len() + usize::from(self.aux_active)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Auxiliary constraint value `‖x‖² − D²`.
pub fn aux_value(x: &[f64], radius: f64) -> f64 {
    linalg::norm_sq(x) - radius * radius
}

pub fn active_set(problem: &ProblemInstance, x: &[f64], include_aux: bool, aux_radius: f64) -> ActiveSet {
    let values = problem.constraint_values(x);
    let aux = include_aux.then(|| aux_value(x, aux_radius));
    ActiveSet::from_values(&values, aux)
}

/// Origin of a polytope row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSource {
    Constraint(usize),
    Aux,
}

/// `{v : G v ≤ −b}` with rows `∇g_i(x)` and offsets `b_i = α g_i(x)` for the
/// active constraints. With no rows it is all of ℝ^d.
#[derive(Clone, Debug)]
pub struct VelocityPolytope {
    pub normals: Matrix,
    pub offsets: Vec<f64>,
    pub alpha: f64,
    pub sources: Vec<RowSource>,
    dim: usize,
}

impl VelocityPolytope {
    /// Assembles a polytope from explicit rows `(∇g_i, g_i)`.
    pub fn from_rows(dim: usize, alpha: f64, rows: &[(Vec<f64>, f64)]) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid_argument("alpha must be positive"));
        }
        let mut p = Self::empty(dim, alpha);
        for (i, (grad, g)) in rows.iter().enumerate() {
            p.push_row(grad, *g, RowSource::Constraint(i))?;
        }
        Ok(p)
    }

    fn empty(dim: usize, alpha: f64) -> Self {
        Self {
            normals: Matrix::zeros(0, dim),
            offsets: Vec::new(),
            alpha,
            sources: Vec::new(),
            dim,
        }
    }

    fn push_row(&mut self, grad: &[f64], g: f64, source: RowSource) -> Result<()> {
        debug_assert_eq!(grad.len(), self.dim);
        if g > 0.0 && grad.iter().all(|v| *v == 0.0) {
            let constraint = match source {
                RowSource::Constraint(i) => i,
                RowSource::Aux => usize::MAX,
            };
            return Err(Error::InfeasibleLinearization { constraint, value: g });
        }
        self.normals.push_row(grad);
        self.offsets.push(self.alpha * g);
        self.sources.push(source);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows `k`.
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `G v + b`, nonpositive componentwise for members.
    pub fn residuals(&self, v: &[f64]) -> Vec<f64> {
        let mut r = self.normals.mul_vec(v);
        linalg::axpy(1.0, &self.offsets, &mut r);
        r
    }

    /// Largest `(G v + b)_i`, or `−∞` without rows.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        self.residuals(v).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        self.is_empty() || self.max_violation(v) <= tol
    }
}

/// Linearizes the active constraints at `x`: row `∇g_i(x)` with offset
/// `α g_i(x)`, in index order, auxiliary row `(2x, α(‖x‖² − D²))` last.
pub fn build_polytope(
    problem: &ProblemInstance,
    x: &[f64],
    alpha: f64,
    active: &ActiveSet,
    aux_radius: f64,
) -> Result<VelocityPolytope> {
    if !(alpha > 0.0) {
        return Err(Error::invalid_argument("alpha must be positive"));
    }
    let d = problem.dim();
    let mut poly = VelocityPolytope::empty(d, alpha);
    let mut grad = vec![0.0; d];
    for &i in &active.indices {
        let g = problem.constraint(i).value_and_gradient(x, &mut grad);
        poly.push_row(&grad, g, RowSource::Constraint(i))?;
    }
    if active.aux_active {
        let aux_grad: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        poly.push_row(&aux_grad, aux_value(x, aux_radius), RowSource::Aux)?;
    }
    Ok(poly)
}

/// Minimizer of `½‖p − q‖²` over `{∑p_i = 1, p_i ≥ 0 for i ∈ restricted}`.
///
/// Sorts only the restricted coordinates, so the cost is `O(d + n log n)`
/// with `n = |restricted|`. With `restricted = [d]` this is the Euclidean
/// projection onto the simplex.
pub fn proj_v(q: &[f64], restricted: &[usize]) -> Vec<f64> {
    let d = q.len();
    assert!(d > 0, "proj_v needs a nonempty vector");
    let mut mask = vec![false; d];
    for &i in restricted {
        assert!(i < d, "restricted index {i} out of range");
        mask[i] = true;
    }
    let n = mask.iter().filter(|m| **m).count();
    let free_sum: f64 = q.iter().zip(&mask).filter(|(_, m)| !**m).map(|(v, _)| v).sum();

    // Stable descending sort; ties keep index order.
    let mut r: Vec<f64> = q.iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| *v).collect();
    r.sort_by(|a, b| b.total_cmp(a));

    let free = d - n;
    let mut prefix = 0.0;
    let mut rho = 0usize;
    let mut rho_prefix = 0.0;
    for (j0, rj) in r.iter().enumerate() {
        let j = j0 + 1;
        prefix += rj;
        if rj + (1.0 - free_sum - prefix) / (free + j) as f64 > 0.0 {
            rho = j;
            rho_prefix = prefix;
        }
    }
    let lambda = if rho == 0 {
        // Reachable only with free coordinates: for n = d the first sorted
        // entry always satisfies r₁ + (1 − r₁) > 0.
        assert!(free > 0, "empty J with every coordinate restricted");
        (1.0 - free_sum) / free as f64
    } else {
        (1.0 - free_sum - rho_prefix) / (free + rho) as f64
    };
    q.iter()
        .zip(&mask)
        .map(|(v, m)| if *m { (v + lambda).max(0.0) } else { v + lambda })
        .collect()
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(q: &[f64]) -> Vec<f64> {
    let all: Vec<usize> = (0..q.len()).collect();
    proj_v(q, &all)
}

/// Euclidean projection onto `{‖y‖ ≤ radius}`.
pub fn project_ball(y: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "radius must be positive");
    let n = linalg::norm(y);
    if n <= radius {
        y.to_vec()
    } else {
        y.iter().map(|v| v * radius / n).collect()
    }
}
