//! Executing a single run: solver dispatch, trace output and the summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cgm_core::baselines;
use cgm_core::metrics::{self, BoundInputs, GapEvaluator, TheoryBounds};
use cgm_core::solver::{self, Averaging, RunTrace};
use cgm_core::problems::Potential;
use cgm_core::ProblemInstance;
use serde_json::{json, Value};

use crate::config::{RunConfig, SolverKind};
use crate::descriptor::constants_json;
use crate::error::{CliError, CliResult};
use crate::trace::TraceWriter;

/// Everything a finished run reports. Serialized as `summary.json`.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub run_id: String,
    pub problem: String,
    pub dim: usize,
    pub alpha: f64,
    pub gap_kind: Option<&'static str>,
    pub initial_gap: Option<f64>,
    pub final_gap: Option<f64>,
    pub initial_feasibility: f64,
    pub final_feasibility: f64,
    pub max_update_residual: f64,
    pub wall_time_seconds: f64,
    pub constants: Value,
    pub bounds: Value,
    pub trace_path: PathBuf,
    pub output: Vec<f64>,
    pub config: RunConfig,
}

impl RunSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "run_id": self.run_id,
            "problem": self.problem,
            "dim": self.dim,
            "alpha": self.alpha,
            "gap_kind": self.gap_kind,
            "initial_gap": self.initial_gap,
            "final_gap": self.final_gap,
            "initial_feasibility": self.initial_feasibility,
            "final_feasibility": self.final_feasibility,
            "max_update_residual": self.max_update_residual,
            "wall_time_seconds": self.wall_time_seconds,
            "constants": self.constants,
            "bounds": self.bounds,
            "trace": self.trace_path,
            "config": self.config,
        })
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&self.to_json()).expect("summary serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Runs one expanded config, writing `trace.csv`, optionally
/// `iterates.csv`, and `summary.json` into its output directory.
pub fn execute(run_id: &str, config: &RunConfig) -> CliResult<RunSummary> {
    let problem = config.problem.build()?;
    let solver_config = config.solver_config(&problem)?;
    let gap = GapEvaluator::for_problem(&problem).map_err(|e| CliError::from_core(run_id, e))?;
    let dir = config.output_dir();
    let mut writer = TraceWriter::create(&dir, &problem, &gap, config.output.iterates)?;

    let x0 = solver::resolve_start(&problem, &solver_config).map_err(|e| CliError::from_core(run_id, e))?;
    let initial_gap = gap.gap(&problem, &x0);
    let initial_feasibility = problem.feasibility(&x0);

    let started = Instant::now();
    let result = match config.solver {
        SolverKind::Cgm => solver::cgm_run_with_observer(&problem, &solver_config, &mut writer),
        SolverKind::Pgm | SolverKind::Gda => {
            let oracle = config.oracle(&problem)?;
            baselines::pgm_run_with_observer(&problem, oracle, &solver_config, &mut writer)
        }
    };
    let wall = started.elapsed().as_secs_f64();
    if let Some(err) = writer.take_failure() {
        return Err(err);
    }
    let trace = result.map_err(|e| CliError::from_core(run_id, e))?;
    let trace_path = writer.trace_path().to_path_buf();
    drop(writer);

    let bounds = bounds_json(&problem, config, &solver_config, &trace, &x0);
    let summary = RunSummary {
        run_id: run_id.to_string(),
        problem: problem.name.clone(),
        dim: problem.dim(),
        alpha: trace.alpha,
        gap_kind: gap.kind().map(|k| k.as_str()),
        initial_gap,
        final_gap: gap.gap(&problem, &trace.output),
        initial_feasibility,
        final_feasibility: problem.feasibility(&trace.output),
        max_update_residual: trace.max_update_residual(),
        wall_time_seconds: wall,
        constants: constants_json(&problem.constants),
        bounds,
        trace_path,
        output: trace.output.clone(),
        config: config.clone(),
    };
    summary.write(&dir)?;
    Ok(summary)
}

fn bounds_json(
    problem: &ProblemInstance,
    config: &RunConfig,
    solver_config: &solver::SolverConfig,
    trace: &RunTrace,
    x0: &[f64],
) -> Value {
    let objective_gap = match (&problem.potential, &problem.reference_solution) {
        (Some(f @ Potential::Minimize(_)), Some(x_star)) => Some(f.value(x0) - f.value(x_star)),
        _ => None,
    };
    let constants = if config.include_aux {
        problem.constants.including_aux()
    } else {
        problem.constants.clone()
    };
    let inputs = BoundInputs {
        iterations: solver_config.iterations,
        epsilon: solver_config.epsilon,
        gamma: solver_config.gamma,
        alpha: (trace.alpha > 0.0).then_some(trace.alpha),
        initial_objective_gap: objective_gap,
    };
    match metrics::theory_bounds(&constants, &inputs) {
        Ok(b) => bounds_value(&b, trace.averaging),
        Err(_) => Value::Null,
    }
}

fn bounds_value(b: &TheoryBounds, averaging: Averaging) -> Value {
    json!({
        "averaging": match averaging {
            Averaging::Uniform => "uniform",
            Averaging::LinearWeight => "linear-weight",
            Averaging::Last => "last",
        },
        "lemma1_x_sq": b.lemma1_x_bound,
        "lemma1_v_sq": b.lemma1_v_bound,
        "thm1_gap": b.thm1_gap_bound,
        "thm1_feasibility": b.thm1_feas_bound,
        "thm2_gap": b.thm2_gap_bound,
        "thm2_feasibility": b.thm2_feas_bound,
        "thm2_feasibility_exponent": b.thm2_feas_exponent,
        "thm3_objective": b.thm3_obj_bound,
        "thm3_feasibility": b.thm3_feas_bound,
    })
}
