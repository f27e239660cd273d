use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, Matrix};

/// A deterministic operator `x ↦ F(x)`.
pub trait VectorField: Send + Sync {
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

impl<T> VectorField for T
where
    T: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self(x, out)
    }
}

/// An operator known through a sampled estimator.
pub trait StochasticField: Send + Sync {
    /// One estimator draw at `x`.
    fn sample(&self, x: &[f64], rng: &mut ChaCha8Rng, out: &mut [f64]);
    /// The estimator's expectation.
    fn mean(&self, x: &[f64], out: &mut [f64]);
}

/// A smooth convex constraint `g(x) ≤ 0`.
pub trait ConstraintFn: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes `∇g(x)` into `grad` and returns `g(x)`.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.value_and_gradient(x, &mut g);
        g
    }
}

impl ConstraintFn for Box<dyn ConstraintFn> {
    fn value(&self, x: &[f64]) -> f64 {
        self.as_ref().value(x)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.as_ref().value_and_gradient(x, grad)
    }
}

/// A smooth scalar objective with gradient.
pub trait ObjectiveFn: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

/// `g(x) = ½ xᵀBx − c`.
#[derive(Clone, Debug)]
pub struct QuadraticConstraint {
    pub b: Matrix,
    pub c: f64,
}

impl QuadraticConstraint {
    pub fn new(b: Matrix, c: f64) -> Self {
        assert_eq!(b.rows(), b.cols(), "B must be square");
        Self { b, c }
    }
}

impl ConstraintFn for QuadraticConstraint {
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * linalg::dot(x, &self.b.mul_vec(x)) - self.c
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.b.mul_vec_into(x, grad);
        0.5 * linalg::dot(x, grad) - self.c
    }
}

/// `g(x) = ‖x − center‖² − radius²`.
#[derive(Clone, Debug)]
pub struct BallConstraint {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallConstraint {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(dim: usize, radius: f64) -> Self {
        Self::new(vec![0.0; dim], radius)
    }
}

impl ConstraintFn for BallConstraint {
    fn value(&self, x: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        d2 - self.radius * self.radius
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut d2 = 0.0;
        for ((g, a), c) in grad.iter_mut().zip(x).zip(&self.center) {
            let diff = a - c;
            d2 += diff * diff;
            *g = 2.0 * diff;
        }
        d2 - self.radius * self.radius
    }
}

/// `g(x) = aᵀx − β`.
#[derive(Clone, Debug)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }
}

impl ConstraintFn for HalfSpace {
    fn value(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.normal, x) - self.offset
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(&self.normal);
        self.value(x)
    }
}

/// A constraint given by a pair of closures.
pub struct FnConstraint<V, G> {
    value: V,
    gradient: G,
}

impl<V, G> FnConstraint<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(value: V, gradient: G) -> Self {
        Self { value, gradient }
    }
}

impl<V, G> ConstraintFn for FnConstraint<V, G>
where
    V: Fn(&[f64]) -> f64 + Send + Sync,
    G: Fn(&[f64], &mut [f64]) + Send + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (self.gradient)(x, grad);
        (self.value)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_constraint_value_and_gradient() {
        let g = QuadraticConstraint::new(Matrix::diagonal(&[2.0, 8.0]), 1.0);
        let mut grad = [0.0; 2];
        let v = g.value_and_gradient(&[0.5, 1.0], &mut grad);
        assert_eq!(v, 3.25);
        assert_eq!(grad, [1.0, 8.0]);
        assert_eq!(g.value(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn ball_and_halfspace() {
        let b = BallConstraint::new(vec![1.0, 0.0], 2.0);
        assert_eq!(b.value(&[1.0, 0.0]), -4.0);
        assert_eq!(b.gradient(&[2.0, 1.0]), vec![2.0, 2.0]);
        let h = HalfSpace::new(vec![1.0, -1.0], 0.5);
        assert_eq!(h.value(&[1.0, 1.0]), -0.5);
        assert_eq!(h.gradient(&[3.0, 7.0]), vec![1.0, -1.0]);
    }
}
