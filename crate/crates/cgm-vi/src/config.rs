//! Run configs: one JSON document describes a problem, a solver and its
//! parameters, output paths, and optional sweep lists.
//!
//! A run summary embeds the resolved single-run config under `"config"`,
//! and [`load`] accepts either form, so any summary can be replayed.

use std::path::{Path, PathBuf};

use cgm_core::baselines::ProjectionOracle;
use cgm_core::solver::{AlphaChoice, Averaging, DirectionMode, SolverConfig, StartPoint, StepSchedule};
use cgm_core::ProblemInstance;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::descriptor::ProblemDescriptor;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Cgm,
    /// Projected gradient.
    Pgm,
    /// Projected gradient on a saddle operator; same iteration as `pgm`.
    Gda,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant { eta: f64 },
    InverseT { mu: f64 },
    LogOverT { mu: f64 },
    /// `η = D/(5L_F√(2T))`, `α = L_F/D`.
    Theorem1,
    /// `η_t = 1/(μ(t+1))`, `α = μ(γ−1)/(γ+1)`.
    Theorem2,
    /// `η = ln T/(μT)`, `α = μ`.
    Theorem3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    /// Must be `"from-theorem"`.
    Named(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingSpec {
    Uniform,
    LinearWeight,
    Last,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    /// `"default"`, `"gaussian"` or `"feasible"`.
    Named(String),
    Point(Vec<f64>),
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Named("default".into())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Defaults to `out/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Also write `iterates.csv` with the coordinates of every `x_t`.
    #[serde(default)]
    pub iterates: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<Vec<usize>>,
    /// Each entry sets both the run seed and the problem seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Accepted range of fitted slopes for `sweep-rates`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_range: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub problem: ProblemDescriptor,
    #[serde(default)]
    pub solver: SolverKind,
    pub iterations: usize,
    pub schedule: ScheduleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averaging: Option<AveragingSpec>,
    #[serde(default)]
    pub include_aux: bool,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Seeds the start point and stochastic sampling; no wall-clock seeding.
    pub seed: u64,
    #[serde(default)]
    pub start: StartSpec,
    /// Force the generic QP solver even where a closed form exists.
    #[serde(default)]
    pub generic_qp: bool,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Clone, Copy)]
enum Patch {
    Seed(u64),
    Iterations(usize),
    Eta(f64),
    Alpha(f64),
}

impl Patch {
    fn label(self) -> String {
        match self {
            Patch::Seed(s) => format!("seed={s}"),
            Patch::Iterations(t) => format!("T={t}"),
            Patch::Eta(e) => format!("eta={e}"),
            Patch::Alpha(a) => format!("alpha={a}"),
        }
    }

    fn apply(self, c: &mut RunConfig) {
        match self {
            Patch::Seed(s) => {
                c.seed = s;
                if c.problem.seed.is_some() {
                    c.problem.seed = Some(s);
                }
            }
            Patch::Iterations(t) => c.iterations = t,
            Patch::Eta(eta) => c.schedule = ScheduleSpec::Constant { eta },
            Patch::Alpha(a) => c.alpha = Some(AlphaSpec::Value(a)),
        }
    }
}

fn default_epsilon() -> f64 {
    1e-8
}

fn default_gamma() -> f64 {
    1.5
}

/// Reads a run config, or the `"config"` member of a run summary.
pub fn load(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}

pub fn parse(text: &str) -> CliResult<RunConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("malformed JSON: {e}")))?;
    let is_summary = value
        .as_object()
        .is_some_and(|o| o.contains_key("config") && o.contains_key("final_gap"));
    if is_summary {
        value = value["config"].take();
    }
    let config: RunConfig = serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn positive(field: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(format!("{field} must be positive and finite, got {v}")))
    }
}

fn nonempty<T>(field: &str, list: &Option<Vec<T>>) -> CliResult<()> {
    match list {
        Some(l) if l.is_empty() => Err(CliError::config(format!("{field} is empty"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.name.trim().is_empty() {
            return Err(CliError::config("name must not be empty"));
        }
        if self.iterations == 0 {
            return Err(CliError::config("iterations must be at least 1"));
        }
        match &self.schedule {
            ScheduleSpec::Constant { eta } => positive("schedule.eta", *eta)?,
            ScheduleSpec::InverseT { mu } | ScheduleSpec::LogOverT { mu } => positive("schedule.mu", *mu)?,
            _ => {}
        }
        match &self.alpha {
            Some(AlphaSpec::Value(a)) => positive("alpha", *a)?,
            Some(AlphaSpec::Named(s)) if s != "from-theorem" => {
                return Err(CliError::config(format!(
                    "alpha must be a number or \"from-theorem\", got {s:?}"
                )))
            }
            None if matches!(self.schedule, ScheduleSpec::Constant { .. }) && self.solver == SolverKind::Cgm => {
                return Err(CliError::config("alpha is required with a constant schedule"))
            }
            _ => {}
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::config("epsilon must be nonnegative"));
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(CliError::config("gamma must exceed 1"));
        }
        if let StartSpec::Named(s) = &self.start {
            if !matches!(s.as_str(), "default" | "gaussian" | "feasible") {
                return Err(CliError::config(format!(
                    "start must be \"default\", \"gaussian\", \"feasible\" or a point, got {s:?}"
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            nonempty("sweep.alpha", &sweep.alpha)?;
            nonempty("sweep.eta", &sweep.eta)?;
            nonempty("sweep.iterations", &sweep.iterations)?;
            nonempty("sweep.seeds", &sweep.seeds)?;
            for a in sweep.alpha.iter().flatten() {
                positive("sweep.alpha", *a)?;
            }
            for e in sweep.eta.iter().flatten() {
                positive("sweep.eta", *e)?;
            }
            if sweep.iterations.iter().flatten().any(|t| *t == 0) {
                return Err(CliError::config("sweep.iterations entries must be at least 1"));
            }
            if sweep.eta.is_some() && !matches!(self.schedule, ScheduleSpec::Constant { .. }) {
                return Err(CliError::config("sweep.eta needs a constant schedule"));
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    /// Expands the sweep into single runs `(run id, config)`. Each expanded
    /// config has no sweep and writes to `<dir>/<run id>`.
    pub fn expand(&self) -> Vec<(String, RunConfig)> {
        let Some(sweep) = &self.sweep else {
            let mut single = self.clone();
            single.output.dir = Some(self.output_dir());
            return vec![(self.name.clone(), single)];
        };
        let base_dir = self.output_dir();
        let mut axes: Vec<Vec<Patch>> = Vec::new();
        if let Some(seeds) = &sweep.seeds {
            axes.push(seeds.iter().map(|&s| Patch::Seed(s)).collect());
        }
        if let Some(ts) = &sweep.iterations {
            axes.push(ts.iter().map(|&t| Patch::Iterations(t)).collect());
        }
        if let Some(etas) = &sweep.eta {
            axes.push(etas.iter().map(|&e| Patch::Eta(e)).collect());
        }
        if let Some(alphas) = &sweep.alpha {
            axes.push(alphas.iter().map(|&a| Patch::Alpha(a)).collect());
        }
        let mut runs = vec![(Vec::<String>::new(), self.clone())];
        for axis in &axes {
            runs = runs
                .iter()
                .flat_map(|(ids, cfg)| {
                    axis.iter().map(move |patch| {
                        let mut c = cfg.clone();
                        patch.apply(&mut c);
                        let mut ids = ids.clone();
                        ids.push(patch.label());
                        (ids, c)
                    })
                })
                .collect();
        }
        runs.into_iter()
            .map(|(ids, mut c)| {
                let id = ids.join("_");
                c.sweep = None;
                c.output.dir = Some(base_dir.join(&id));
                (id, c)
            })
            .collect()
    }

    /// The solver config for this (single) run on `problem`.
    pub fn solver_config(&self, problem: &ProblemInstance) -> CliResult<SolverConfig> {
        let core = |e: cgm_core::Error| CliError::config(format!("{}: {e}", self.name));
        let t = self.iterations;
        let mut cfg = match self.schedule {
            ScheduleSpec::Constant { eta } => SolverConfig::new(t, eta, 1.0),
            ScheduleSpec::InverseT { mu } => SolverConfig {
                schedule: StepSchedule::InverseT { mu },
                averaging: Averaging::LinearWeight,
                ..SolverConfig::new(t, 1.0, 1.0)
            },
            ScheduleSpec::LogOverT { mu } => SolverConfig {
                schedule: StepSchedule::LogOverT { mu },
                averaging: Averaging::Last,
                ..SolverConfig::new(t, 1.0, 1.0)
            },
            ScheduleSpec::Theorem1 => SolverConfig::theorem1(problem, t).map_err(core)?,
            ScheduleSpec::Theorem2 => SolverConfig::theorem2(problem, t, self.gamma).map_err(core)?,
            ScheduleSpec::Theorem3 => SolverConfig::theorem3(problem, t).map_err(core)?,
        };
        match &self.alpha {
            Some(AlphaSpec::Value(a)) => cfg.alpha = AlphaChoice::Fixed(*a),
            Some(AlphaSpec::Named(_)) => cfg.alpha = AlphaChoice::FromTheorem,
            None => {}
        }
        if let Some(avg) = self.averaging {
            cfg.averaging = match avg {
                AveragingSpec::Uniform => Averaging::Uniform,
                AveragingSpec::LinearWeight => Averaging::LinearWeight,
                AveragingSpec::Last => Averaging::Last,
            };
        }
        cfg.epsilon = self.epsilon;
        cfg.include_aux = self.include_aux;
        cfg.gamma = self.gamma;
        cfg.seed = self.seed;
        cfg.start = match &self.start {
            StartSpec::Point(p) => StartPoint::Given(p.clone()),
            StartSpec::Named(s) => match s.as_str() {
                "gaussian" => StartPoint::Gaussian,
                "feasible" => StartPoint::Feasible,
                _ => StartPoint::ProblemDefault,
            },
        };
        if self.generic_qp {
            cfg.direction = DirectionMode::Generic;
        }
        cfg.validate().map_err(core)?;
        Ok(cfg)
    }

    /// The projection oracle for baseline runs.
    pub fn oracle(&self, problem: &ProblemInstance) -> CliResult<ProjectionOracle> {
        ProjectionOracle::for_problem(problem).ok_or_else(|| {
            CliError::config(format!(
                "solver {:?} needs a cheap projection, but {} has none",
                self.solver, problem.name
            ))
        })
    }
}
