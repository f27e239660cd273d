//! Constrained gradient method (CGM) for monotone variational inequalities
//! with functional constraints.
//!
//! Given an operator `F` and convex constraints `g_i(x) ≤ 0`, CGM never
//! projects iterates onto the feasible set. Each step instead projects the
//! velocity `−F(x_t)` onto the polytope of linearized active constraints
//!
//! ```text
//!     V_α(x) = { v : α g_i(x) + ∇g_i(x)ᵀ v ≤ 0,  i active at x }
//! ```
//!
//! and moves `x_{t+1} = x_t + η_t v_t`. The crate is `no_std` (with
//! `alloc`) and contains the whole algorithmic stack:
//!
//! - [`problems`]: the instance abstraction and benchmark generators,
//! - [`geometry`]: active sets, velocity polytopes, simplex and ball projections,
//! - [`qp`]: direction solvers (closed form, active set, dual projected gradient),
//! - [`solver`]: the CGM loop, the direct simplex variant and step-size schedules,
//! - [`baselines`]: projected gradient / gradient descent ascent,
//! - [`metrics`]: gap evaluators, feasibility and theory bounds.
#![no_std]
// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod problems;
pub mod qp;
pub mod solver;

pub use error::{Error, Result};
pub use problems::{ProblemInstance, Structure};
pub use solver::{cgm_run, simplex_cgm_run, Averaging, RunTrace, SolverConfig};
