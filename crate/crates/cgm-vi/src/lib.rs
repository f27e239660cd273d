//! Experiment runner for the constrained gradient method: JSON run
//! configs, CSV traces, run summaries, the validation suite and rate
//! sweeps. The algorithms themselves live in `cgm-core`.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod oracle;
pub mod rates;
pub mod run;
pub mod trace;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
