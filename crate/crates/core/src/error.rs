use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An active constraint has a vanishing gradient while strictly violated,
    /// so its linearized half-space is empty.
    #[error("infeasible linearization of constraint {constraint}: g = {value:e} with zero gradient")]
    InfeasibleLinearization { constraint: usize, value: f64 },

    #[error("direction subproblem is infeasible (Farkas certificate residual {residual:e})")]
    InfeasibleSubproblem { residual: f64 },

    #[error("direction solver exceeded {iterations} iterations (best certificate {delta:e})")]
    MaxIterations {
        iterations: usize,
        best_v: Vec<f64>,
        delta: f64,
    },

    /// A direction or iterate overflowed; the step size is too large for the instance.
    #[error("{quantity} is not finite")]
    NonFinite { quantity: &'static str },

    #[error("iteration {iteration}: {source}")]
    AtIteration { iteration: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// Strips any iteration context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }
}
