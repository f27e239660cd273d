//! The three subcommands. Each returns `Ok(true)` on success, `Ok(false)`
//! when it ran but something it checks failed, and `Err` with an exit code
//! otherwise.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use crate::checks::{self, Options};
use crate::config::{self, RunConfig};
use crate::error::{CliError, CliResult};
use crate::rates;
use crate::run::{self, RunSummary};

pub const THREADS_ENV: &str = "CGM_VI_THREADS";

/// A worker pool capped by `CGM_VI_THREADS` when it is set.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))
}

/// Executes every expanded run of `config` in parallel. Each worker owns
/// its run directory; results come back in sweep order.
pub fn execute_all(config: &RunConfig) -> CliResult<Vec<RunSummary>> {
    let runs = config.expand();
    // build every instance up front so config errors surface before any work
    for (_, c) in &runs {
        c.problem.build()?;
    }
    let pool = thread_pool()?;
    let results: Vec<CliResult<RunSummary>> =
        pool.install(|| runs.par_iter().map(|(id, c)| run::execute(id, c)).collect());
    results.into_iter().collect()
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn print_run(s: &RunSummary) {
    let gap = s.final_gap.map_or("n/a".to_string(), |g| format!("{g:.6e}"));
    println!(
        "{}: gap {} ({}), feasibility {:.3e}, {:.2}s -> {}",
        s.run_id,
        gap,
        s.gap_kind.unwrap_or("none"),
        s.final_feasibility,
        s.wall_time_seconds,
        s.trace_path.display()
    );
}

pub fn cmd_run(path: &Path) -> CliResult<bool> {
    let config = config::load(path)?;
    let summaries = execute_all(&config)?;
    for s in &summaries {
        print_run(s);
    }
    if config.sweep.is_some() {
        let index: Vec<_> = summaries
            .iter()
            .map(|s| {
                json!({
                    "run_id": s.run_id,
                    "final_gap": s.final_gap,
                    "final_feasibility": s.final_feasibility,
                    "wall_time_seconds": s.wall_time_seconds,
                    "dir": s.config.output_dir(),
                })
            })
            .collect();
        write_json(&config.output_dir().join("sweep.json"), &json!({ "name": config.name, "runs": index }))?;
    }
    Ok(true)
}

pub fn cmd_validate(filter: Option<&str>, report: Option<&Path>, opts: &Options) -> CliResult<bool> {
    if let Some(f) = filter {
        if !checks::all_checks().iter().any(|c| c.name.contains(f)) {
            return Err(CliError::config(format!("--filter {f:?} matches no check")));
        }
    }
    let pool = thread_pool()?;
    let outcomes = pool.install(|| checks::run_checks(filter, opts));
    for o in &outcomes {
        println!(
            "{} {:<28} worst {:.3e} / limit {:.1e}  ({} cases, {:.2}s)  {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.worst,
            o.limit,
            o.cases,
            o.seconds,
            o.detail
        );
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let json = checks::report_json(&outcomes);
    match report {
        Some(path) => write_json(path, &json)?,
        None => println!("{}", serde_json::to_string(&json).expect("serializable")),
    }
    Ok(passed)
}

pub fn cmd_sweep_rates(path: &Path) -> CliResult<bool> {
    let config = config::load(path)?;
    rates::validate(&config)?;
    let summaries = execute_all(&config)?;
    let report = rates::fit(&config, &summaries)?;
    for g in &report.groups {
        let ci = g.ci95.map_or(String::new(), |[lo, hi]| format!(" (95% CI [{lo:.3}, {hi:.3}])"));
        let verdict = match g.in_range {
            Some(true) => " in range",
            Some(false) => " OUT OF RANGE",
            None => "",
        };
        println!("{}: slope {:.4}{ci}, R² {:.4}{verdict}", g.group, g.slope, g.r_squared);
    }
    println!("mean slope {:.4}", report.mean_slope);
    let path = config.output_dir().join("rates.json");
    write_json(&path, &serde_json::to_value(&report).expect("serializable"))?;
    println!("report -> {}", path.display());
    Ok(report.passed)
}
