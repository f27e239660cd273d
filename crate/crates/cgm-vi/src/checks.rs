//! The validation suite: oracle equivalences, boundedness and feasibility
//! invariants, rate reproduction and derivative checks, each a named check
//! with a pass/fail outcome.

use std::time::Instant;

use cgm_core::geometry::{self, VelocityPolytope};
use cgm_core::linalg::{self, Matrix};
use cgm_core::metrics::{self, BoundInputs, GapEvaluator};
use cgm_core::problems::{self, ProblemInstance};
use cgm_core::qp::{self, QpOptions};
use cgm_core::solver::{self, SolverConfig, StartPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::oracle;

/// The single-constraint direction `v(g, ∇g, F, α)` under test.
pub type ClosedForm = fn(f64, &[f64], &[f64], f64) -> Vec<f64>;

pub fn closed_form(g: f64, grad: &[f64], fx: &[f64], alpha: f64) -> Vec<f64> {
    qp::solve_direction_single(g, grad, fx, alpha)
        .map(|r| r.v)
        .unwrap_or_else(|_| vec![f64::NAN; fx.len()])
}

/// The closed form with the `max{0, ·}` clamp on `λ` dropped.
pub fn unclamped_closed_form(g: f64, grad: &[f64], fx: &[f64], alpha: f64) -> Vec<f64> {
    let lambda = (alpha * g - linalg::dot(grad, fx)) / linalg::norm_sq(grad);
    fx.iter().zip(grad).map(|(f, a)| -f - lambda * a).collect()
}

#[derive(Clone, Copy)]
pub struct Options {
    pub closed_form: ClosedForm,
}

impl Default for Options {
    fn default() -> Self {
        Self { closed_form }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest error (or ratio) observed, against `limit`.
    pub worst: f64,
    pub limit: f64,
    pub detail: String,
    pub seconds: f64,
}

pub struct Check {
    pub name: &'static str,
    pub about: &'static str,
    run: fn(&Options) -> CheckOutcome,
}

impl Check {
    pub fn run(&self, opts: &Options) -> CheckOutcome {
        let started = Instant::now();
        let mut out = (self.run)(opts);
        out.seconds = started.elapsed().as_secs_f64();
        out
    }
}

pub fn all_checks() -> Vec<Check> {
    vec![
        Check {
            name: "proj-v-oracle",
            about: "proj_v against subset enumeration, 1000 cases, d ≤ 8",
            run: proj_v_oracle,
        },
        Check {
            name: "qp-oracle",
            about: "generic direction QP against working-set enumeration, 1000 polytopes",
            run: qp_oracle,
        },
        Check {
            name: "closed-form-equivalence",
            about: "single-constraint closed form against the generic QP, 1000 rows",
            run: closed_form_equivalence,
        },
        Check {
            name: "simplex-structural",
            about: "one direct simplex step against generic CGM on the explicit simplex system",
            run: simplex_structural,
        },
        Check {
            name: "lemma1-boundedness",
            about: "‖x_t‖² and ‖v_t‖² bounds on 20 monotone instances with the auxiliary ball",
            run: lemma1_boundedness,
        },
        Check {
            name: "thm1-feasibility",
            about: "max g_i(x_t) against the monotone feasibility bound on the same runs",
            run: thm1_feasibility,
        },
        Check {
            name: "monotone-rate",
            about: "quadratic-constraint game, d = 50: log-log gap slope in [−0.65, −0.35]",
            run: monotone_rate,
        },
        Check {
            name: "strongly-monotone-rate",
            about: "strongly monotone ball game: log-log distance slope in [−1.25, −0.75]",
            run: strongly_monotone_rate,
        },
        Check {
            name: "quad-game-reproduction",
            about: "d = 50, T = 1000, η = 0.01, α = 50: 10× gap and 100× feasibility reduction",
            run: quad_game_reproduction,
        },
        Check {
            name: "simplex-game-reproduction",
            about: "d = 100, T = 1000, η = 0.005, α = 100: geometric sum residual, 5× gap drop after t = 10",
            run: simplex_game_reproduction,
        },
        Check {
            name: "forsaken-alpha-violation",
            about: "peak violation strictly decreasing in α ∈ {0.5, 2, 8}",
            run: forsaken_alpha_violation,
        },
        Check {
            name: "convex-minimization-bound",
            about: "f(x_T) − f* ≤ (f(x₀) − f*)/T at T ∈ {64, 256}",
            run: convex_minimization_bound,
        },
        Check {
            name: "finite-difference",
            about: "constraint gradients and operators against central differences",
            run: finite_difference,
        },
        Check {
            name: "quadratic-gap-kkt",
            about: "closed-form quadratic gap against the radial KKT construction, 100 SPD instances",
            run: quadratic_gap_kkt,
        },
        Check {
            name: "rate-fit-planted",
            about: "rate_fit recovers planted exponents −1 and −0.5",
            run: rate_fit_planted,
        },
    ]
}

/// Runs every check whose name contains `filter`, in parallel.
pub fn run_checks(filter: Option<&str>, opts: &Options) -> Vec<CheckOutcome> {
    let checks: Vec<Check> = all_checks()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .collect();
    checks.par_iter().map(|c| c.run(opts)).collect()
}

pub fn report_json(outcomes: &[CheckOutcome]) -> Value {
    json!({
        "passed": outcomes.iter().all(|o| o.passed),
        "checks": outcomes,
    })
}

/// Counts cases and failures against a limit on an error measure.
struct Tally {
    cases: usize,
    failures: usize,
    worst: f64,
    limit: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(limit: f64) -> Self {
        Self {
            cases: 0,
            failures: 0,
            worst: 0.0,
            limit,
            notes: Vec::new(),
        }
    }

    /// NaN counts as a failure.
    fn record(&mut self, err: f64) -> bool {
        self.cases += 1;
        let ok = err <= self.limit;
        if !ok {
            self.failures += 1;
        }
        if err.is_nan() || err > self.worst {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
        }
        ok
    }

    fn fail(&mut self, note: String) {
        self.cases += 1;
        self.failures += 1;
        self.note(note);
    }

    fn note(&mut self, note: String) {
        if self.notes.len() < 5 {
            self.notes.push(note);
        }
    }

    fn finish(self, name: &'static str, detail: impl Into<String>) -> CheckOutcome {
        let mut detail = detail.into();
        for n in &self.notes {
            detail.push_str("; ");
            detail.push_str(n);
        }
        CheckOutcome {
            name,
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            limit: self.limit,
            detail,
            seconds: 0.0,
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn proj_v_oracle(_: &Options) -> CheckOutcome {
    let mut rng = rng(0x9501);
    let mut tally = Tally::new(1e-9);
    for case in 0..1000 {
        let d = rng.random_range(1..=8);
        let scale = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let q: Vec<f64> = gaussian(&mut rng, d).into_iter().map(|v| scale * v).collect();
        let restricted: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.6)).collect();
        let err = linalg::max_abs_diff(&geometry::proj_v(&q, &restricted), &oracle::brute_force_proj_v(&q, &restricted));
        if !tally.record(err) {
            tally.note(format!("case {case}: error {err:e}"));
        }
    }
    tally.finish("proj-v-oracle", "‖proj_v − brute force‖∞")
}

fn random_row(rng: &mut ChaCha8Rng, d: usize) -> (Vec<f64>, f64) {
    let g = if rng.random_bool(0.3) {
        0.0
    } else {
        rng.sample::<f64, _>(StandardNormal).abs()
    };
    (gaussian(rng, d), g)
}

fn qp_oracle(_: &Options) -> CheckOutcome {
    let mut rng = rng(0x9502);
    let mut tally = Tally::new(1e-9);
    let mut empty = 0;
    for case in 0..1000 {
        let d = rng.random_range(1..=8);
        let k = rng.random_range(1..=6);
        let alpha = rng.random_range(0.5..5.0);
        let mut rows: Vec<(Vec<f64>, f64)> = (0..k).map(|_| random_row(&mut rng, d)).collect();
        if k >= 2 && rng.random_bool(0.2) {
            // a dependent row: positive multiple of another, same scaled offset
            let s: f64 = rng.random_range(0.5..2.0);
            let (grad, g) = rows[0].clone();
            rows[k - 1] = (grad.iter().map(|v| s * v).collect(), s * g);
        }
        let fx = gaussian(&mut rng, d);
        let poly = VelocityPolytope::from_rows(d, alpha, &rows).expect("rows have nonzero gradients");
        let fast = qp::solve_direction_generic(&poly, &fx, 1e-8, &QpOptions::default());
        match (fast, oracle::brute_force_qp(&poly, &fx)) {
            (Ok(r), Some(v)) => {
                // nearly empty polytopes push ‖v‖ to 10³ and beyond
                let err = linalg::max_abs_diff(&r.v, &v) / (1.0 + linalg::max_abs(&v));
                if !tally.record(err) {
                    tally.note(format!("case {case}: d={d} k={k} error {err:e}"));
                }
            }
            (Err(cgm_core::Error::InfeasibleSubproblem { .. }), None) => {
                empty += 1;
                tally.record(0.0);
            }
            (Ok(_), None) => tally.fail(format!("case {case}: solver found a direction in an empty polytope")),
            (Err(e), _) => tally.fail(format!("case {case}: {e}")),
        }
    }
    tally.finish(
        "qp-oracle",
        format!("‖v − brute force‖∞/(1 + ‖v‖∞); {empty} empty polytopes agreed"),
    )
}

fn closed_form_equivalence(opts: &Options) -> CheckOutcome {
    let mut rng = rng(0x9503);
    let mut tally = Tally::new(1e-9);
    for case in 0..1000 {
        let d = rng.random_range(1..=8);
        let alpha = rng.random_range(0.5..5.0);
        let (grad, g) = random_row(&mut rng, d);
        let fx = gaussian(&mut rng, d);
        let closed = (opts.closed_form)(g, &grad, &fx, alpha);
        let poly = VelocityPolytope::from_rows(d, alpha, &[(grad.clone(), g)]).expect("nonzero gradient");
        match qp::solve_direction_generic(&poly, &fx, 1e-8, &QpOptions::default()) {
            Ok(r) => {
                let err = linalg::max_abs_diff(&closed, &r.v);
                if !tally.record(err) {
                    tally.note(format!("case {case}: error {err:e}"));
                }
            }
            Err(e) => tally.fail(format!("case {case}: {e}")),
        }
    }
    tally.finish("closed-form-equivalence", "‖closed form − generic QP‖∞")
}

/// A point of the simplex with coordinates in `2⁻⁶ℤ`, so `∑z = 1` holds
/// exactly and both halves of the hyperplane constraint are active.
fn dyadic_simplex_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut support: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.7)).collect();
    if support.is_empty() {
        support.push(rng.random_range(0..d));
    }
    let mut units = vec![0u32; d];
    for _ in 0..64 {
        units[support[rng.random_range(0..support.len())]] += 1;
    }
    units.into_iter().map(|u| u as f64 / 64.0).collect()
}

fn simplex_structural(_: &Options) -> CheckOutcome {
    let mut rng = rng(0x9504);
    let mut tally = Tally::new(1e-8);
    for case in 0..200 {
        let d = rng.random_range(2..=6);
        let m = Matrix::from_row_major(d, d, gaussian(&mut rng, d * d));
        let c = gaussian(&mut rng, d);
        let z = dyadic_simplex_point(&mut rng, d);
        let alpha = rng.random_range(0.5..5.0);
        let eta = rng.random_range(0.01..1.0) / alpha;
        let (implicit, explicit) = oracle::simplex_pair(m, c);
        let cfg = SolverConfig {
            start: StartPoint::Given(z),
            ..SolverConfig::new(1, eta, alpha)
        };
        match (solver::simplex_cgm_run(&implicit, &cfg), solver::cgm_run(&explicit, &cfg)) {
            (Ok(a), Ok(b)) => {
                let err = linalg::max_abs_diff(&a.final_iterate, &b.final_iterate);
                if !tally.record(err) {
                    tally.note(format!("case {case}: d={d} error {err:e}"));
                }
            }
            (Err(e), _) | (_, Err(e)) => tally.fail(format!("case {case}: {e}")),
        }
    }
    tally.finish("simplex-structural", "‖x₁(direct) − x₁(generic)‖∞")
}

struct MonotoneRun {
    seed: u64,
    problem: ProblemInstance,
    trace: cgm_core::RunTrace,
    bounds: metrics::TheoryBounds,
}

/// Twenty seeded monotone instances with the auxiliary ball row, a
/// feasible start and the monotone schedule at `T = 400`.
fn monotone_runs() -> Vec<Result<MonotoneRun, String>> {
    (1..=20u64)
        .into_par_iter()
        .map(|seed| {
            let problem = problems::make_random_monotone(6, 3, 3, 0.0, seed).map_err(|e| e.to_string())?;
            let cfg = SolverConfig {
                include_aux: true,
                start: StartPoint::Feasible,
                seed,
                ..SolverConfig::theorem1(&problem, 400).map_err(|e| e.to_string())?
            };
            let trace = solver::cgm_run(&problem, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
            let inputs = BoundInputs {
                iterations: cfg.iterations,
                epsilon: cfg.epsilon,
                gamma: cfg.gamma,
                alpha: Some(trace.alpha),
                initial_objective_gap: None,
            };
            let bounds = metrics::theory_bounds(&problem.constants.including_aux(), &inputs)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            Ok(MonotoneRun {
                seed,
                problem,
                trace,
                bounds,
            })
        })
        .collect()
}

fn lemma1_boundedness(_: &Options) -> CheckOutcome {
    // (‖·‖² − margin)/bound ≤ 1 is exactly ‖·‖² ≤ bound + margin
    let margin = 1e-8;
    let mut tally = Tally::new(1.0);
    let mut iterates = 0;
    for run in monotone_runs() {
        let run = match run {
            Ok(r) => r,
            Err(e) => {
                tally.fail(e);
                continue;
            }
        };
        let (Some(bx), Some(bv)) = (run.bounds.lemma1_x_bound, run.bounds.lemma1_v_bound) else {
            tally.fail(format!("seed {}: bounds unavailable", run.seed));
            continue;
        };
        for x in run.trace.records.iter().map(|r| &r.x).chain([&run.trace.final_iterate]) {
            iterates += 1;
            let n = linalg::norm_sq(x);
            if !tally.record((n - margin) / bx) {
                tally.note(format!("seed {}: ‖x‖² = {n:.4} > {bx:.4}", run.seed));
            }
        }
        for rec in &run.trace.records {
            let n = linalg::norm_sq(&rec.v);
            if !tally.record((n - margin) / bv) {
                tally.note(format!("seed {} t {}: ‖v‖² = {n:.4} > {bv:.4}", run.seed, rec.t));
            }
        }
    }
    tally.finish("lemma1-boundedness", format!("max ‖·‖²/bound over {iterates} iterates"))
}

fn thm1_feasibility(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(1.0);
    for run in monotone_runs() {
        let run = match run {
            Ok(r) => r,
            Err(e) => {
                tally.fail(e);
                continue;
            }
        };
        let Some(bound) = run.bounds.thm1_feas_bound else {
            tally.fail(format!("seed {}: bound unavailable", run.seed));
            continue;
        };
        let radius = run.problem.constants.radius;
        let peak = run
            .trace
            .records
            .iter()
            .map(|r| &r.x)
            .chain([&run.trace.final_iterate])
            .map(|x| {
                let g = run.problem.constraint_values(x).into_iter().fold(f64::NEG_INFINITY, f64::max);
                g.max(geometry::aux_value(x, radius))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if !tally.record(peak.max(0.0) / bound) {
            tally.note(format!("seed {}: max g = {peak:e} > {bound:e}", run.seed));
        }
    }
    tally.finish("thm1-feasibility", "max_{t,i} g_i(x_t) / bound per run")
}

const RATE_HORIZONS: [usize; 3] = [256, 1024, 4096];

/// Fits the gap slope for each seed; `make` builds the instance and config.
fn rate_check(
    name: &'static str,
    range: [f64; 2],
    make: impl Fn(u64, usize) -> cgm_core::Result<(ProblemInstance, SolverConfig)> + Sync,
) -> CheckOutcome {
    let jobs: Vec<(u64, usize)> = (1..=5u64).flat_map(|s| RATE_HORIZONS.map(|t| (s, t))).collect();
    let gaps: Vec<Result<(u64, usize, f64), String>> = jobs
        .par_iter()
        .map(|&(seed, t)| {
            let (p, cfg) = make(seed, t).map_err(|e| e.to_string())?;
            let trace = solver::cgm_run(&p, &cfg).map_err(|e| format!("seed {seed} T {t}: {e}"))?;
            let gap = GapEvaluator::for_problem(&p)
                .map_err(|e| e.to_string())?
                .gap(&p, &trace.output)
                .ok_or_else(|| "no gap evaluator".to_string())?;
            Ok((seed, t, gap))
        })
        .collect();
    let mut tally = Tally::new(0.0);
    let mut slopes = Vec::new();
    let mut by_seed: Vec<(u64, Vec<(f64, f64)>)> = Vec::new();
    for g in gaps {
        match g {
            Ok((seed, t, gap)) => match by_seed.iter_mut().find(|(s, _)| *s == seed) {
                Some((_, pts)) => pts.push((t as f64, gap)),
                None => by_seed.push((seed, vec![(t as f64, gap)])),
            },
            Err(e) => tally.fail(e),
        }
    }
    for (seed, pts) in by_seed {
        match metrics::rate_fit(&pts) {
            Ok(fit) => {
                slopes.push(format!("{:.3}", fit.slope));
                // distance outside the accepted interval
                let out = (range[0] - fit.slope).max(fit.slope - range[1]).max(0.0);
                if !tally.record(out) {
                    tally.note(format!("seed {seed}: slope {:.3}", fit.slope));
                }
            }
            Err(e) => tally.fail(format!("seed {seed}: {e}")),
        }
    }
    tally.finish(
        name,
        format!("slopes [{}] against [{}, {}]", slopes.join(", "), range[0], range[1]),
    )
}

fn monotone_rate(_: &Options) -> CheckOutcome {
    rate_check("monotone-rate", [-0.65, -0.35], |seed, t| {
        let p = problems::make_matrix_game_quadratic(50, seed)?;
        let cfg = SolverConfig {
            start: StartPoint::Feasible,
            seed,
            ..SolverConfig::theorem1(&p, t)?
        };
        Ok((p, cfg))
    })
}

fn strongly_monotone_rate(_: &Options) -> CheckOutcome {
    rate_check("strongly-monotone-rate", [-1.25, -0.75], |seed, t| {
        let p = problems::make_strongly_monotone_ball(25, 1.0, seed)?;
        let cfg = SolverConfig {
            start: StartPoint::Feasible,
            seed,
            ..SolverConfig::theorem2(&p, t, 3.0)?
        };
        Ok((p, cfg))
    })
}

fn quad_game_reproduction(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(1.0);
    let run = || -> cgm_core::Result<_> {
        let p = problems::make_matrix_game_quadratic(50, 7)?;
        let cfg = SolverConfig {
            start: StartPoint::Gaussian,
            seed: 7,
            ..SolverConfig::new(1000, 0.01, 50.0)
        };
        let trace = solver::cgm_run(&p, &cfg)?;
        let gap = GapEvaluator::for_problem(&p)?;
        let x0 = &trace.records[0].x;
        let g0 = gap.gap(&p, x0).unwrap_or(f64::NAN);
        let g1 = gap.gap(&p, &trace.output).unwrap_or(f64::NAN);
        Ok((g0, g1, p.feasibility(x0), p.feasibility(&trace.output)))
    };
    match run() {
        Ok((g0, g1, f0, f1)) => {
            tally.record(g1 / (0.1 * g0));
            tally.record(if f1 == 0.0 { 0.0 } else { f1 / (0.01 * f0) });
            tally.finish(
                "quad-game-reproduction",
                format!("gap {g0:.4} → {g1:.4}, feasibility {f0:.4} → {f1:.3e}"),
            )
        }
        Err(e) => {
            tally.fail(e.to_string());
            tally.finish("quad-game-reproduction", "run failed")
        }
    }
}

fn simplex_game_reproduction(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(1.0);
    let run = || -> cgm_core::Result<_> {
        let p = problems::make_matrix_game_simplex(100, 7)?;
        let (alpha, eta) = (100.0, 0.005);
        let cfg = SolverConfig {
            start: StartPoint::Gaussian,
            seed: 7,
            ..SolverConfig::new(1000, eta, alpha)
        };
        let trace = solver::cgm_run(&p, &cfg)?;
        Ok((p, trace, 1.0 - alpha * eta))
    };
    let (p, trace, rate) = match run() {
        Ok(r) => r,
        Err(e) => {
            tally.fail(e.to_string());
            return tally.finish("simplex-game-reproduction", "run failed");
        }
    };
    let residual = |x: &[f64]| (x.iter().sum::<f64>() - 1.0).abs();
    let r0 = residual(&trace.records[0].x);
    let xs = trace.records.iter().map(|r| r.x.as_slice()).chain([trace.final_iterate.as_slice()]);
    let mut worst_excess = f64::NEG_INFINITY;
    for (t, x) in xs.enumerate() {
        let allowed = rate.powi(t as i32) * r0 + 1e-8;
        let r = residual(x);
        worst_excess = worst_excess.max(r - allowed);
        if r > allowed {
            tally.fail(format!("t {t}: |∑z − 1| = {r:e} > {allowed:e}"));
        }
    }
    let gap = GapEvaluator::for_problem(&p).expect("simplex game has a gap model");
    let outputs = trace.running_outputs();
    let early = gap.gap(&p, &outputs[10]).unwrap_or(f64::NAN);
    let late = gap.gap(&p, &trace.output).unwrap_or(f64::NAN);
    tally.record(5.0 * late / early);
    tally.finish(
        "simplex-game-reproduction",
        format!("sum residual excess {worst_excess:.2e}; average gap {early:.4} at t = 10 → {late:.4}"),
    )
}

fn forsaken_alpha_violation(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(0.0);
    let p = problems::make_forsaken();
    let mut peaks = Vec::new();
    for alpha in [0.5, 2.0, 8.0] {
        let cfg = SolverConfig {
            start: StartPoint::Given(vec![0.5, 1.0]),
            ..SolverConfig::new(64, 0.1, alpha)
        };
        match solver::cgm_run(&p, &cfg) {
            Ok(trace) => {
                // x₀ is shared by every α, so the peak is taken over t ≥ 1
                let peak = trace.records[1..]
                    .iter()
                    .map(|r| &r.x)
                    .chain([&trace.final_iterate])
                    .map(|x| p.feasibility(x))
                    .fold(0.0, f64::max);
                peaks.push((alpha, peak));
            }
            Err(e) => tally.fail(format!("α = {alpha}: {e}")),
        }
    }
    for w in peaks.windows(2) {
        // positive when the later peak is not strictly lower
        let excess = w[1].1 - w[0].1;
        tally.record(if excess < 0.0 { 0.0 } else { excess.max(f64::MIN_POSITIVE) });
    }
    let listed: Vec<String> = peaks.iter().map(|(a, v)| format!("α={a}: {v:.4}")).collect();
    tally.finish("forsaken-alpha-violation", format!("peak violation {}", listed.join(", ")))
}

fn convex_minimization_bound(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(1.0);
    let mut notes = Vec::new();
    let p = problems::make_ball_minimization(vec![2.0, 1.0, -1.0], 1.0).expect("valid instance");
    let f = p.potential.as_ref().expect("minimization potential");
    let f_star = f.value(p.reference_solution.as_ref().expect("known minimizer"));
    let x0 = vec![-0.5, 0.2, 0.3];
    let initial = f.value(&x0) - f_star;
    for t in [64, 256] {
        let cfg = SolverConfig::theorem3(&p, t).map(|c| SolverConfig {
            start: StartPoint::Given(x0.clone()),
            ..c
        });
        match cfg.and_then(|c| solver::cgm_run(&p, &c)) {
            Ok(trace) => {
                let excess = f.value(&trace.final_iterate) - f_star;
                let bound = initial / t as f64;
                notes.push(format!("T={t}: {excess:.3e} vs {bound:.3e}"));
                // negative excess means x_T is slightly infeasible and below f*
                tally.record(excess.max(0.0) / bound);
            }
            Err(e) => tally.fail(format!("T = {t}: {e}")),
        }
    }
    tally.finish("convex-minimization-bound", format!("f(x_T) − f*: {}", notes.join(", ")))
}

fn derivative_instances() -> Vec<ProblemInstance> {
    let mut out = vec![
        problems::make_forsaken(),
        problems::make_ball_minimization(vec![2.0, 1.0, -1.0], 1.0).expect("valid"),
    ];
    let seeded = [
        problems::make_toy_gan(16, 3),
        problems::make_matrix_game_quadratic(4, 3),
        problems::make_matrix_game_simplex(3, 3),
        problems::make_strongly_monotone_ball(3, 1.0, 3),
        problems::make_random_monotone(5, 2, 2, 0.1, 3),
    ];
    out.extend(seeded.into_iter().map(|p| p.expect("valid")));
    out
}

fn finite_difference(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(1e-6);
    let mut rng = rng(0x9512);
    let mut operators = 0;
    for p in derivative_instances() {
        for _ in 0..5 {
            let x: Vec<f64> = gaussian(&mut rng, p.dim()).into_iter().map(|v| 0.5 * v).collect();
            if p.num_constraints() > 0 {
                let err = oracle::check_constraint_gradients(&p, &x);
                if !tally.record(err) {
                    tally.note(format!("{} ∇g: {err:e}", p.name));
                }
            }
            if let Some(err) = oracle::check_operator(&p, &x) {
                operators += 1;
                if !tally.record(err) {
                    tally.note(format!("{} F: {err:e}", p.name));
                }
            }
        }
    }
    tally.finish(
        "finite-difference",
        format!("relative central-difference error; {operators} operator evaluations"),
    )
}

fn quadratic_gap_kkt(_: &Options) -> CheckOutcome {
    let mut rng = rng(0x9514);
    let mut tally = Tally::new(1e-9);
    for case in 0..100 {
        let n = rng.random_range(1..=8);
        let g = Matrix::from_row_major(n, n, gaussian(&mut rng, n * n));
        let mut b = g.transpose().matmul(&g);
        for i in 0..n {
            b[(i, i)] += 0.1;
        }
        let c = rng.random_range(0.1..2.0);
        let fz = gaussian(&mut rng, n);
        let fast = metrics::gap_quadratic_game(&[], &b, c, &fz);
        match (fast, oracle::radial_kkt_gap(&b, c, &fz)) {
            (Ok(a), Some((r, _, kkt))) => {
                let err = ((a - r).abs() / (1.0 + r.abs())).max(kkt / (1.0 + linalg::norm(&fz)));
                if !tally.record(err) {
                    tally.note(format!("case {case}: {a} vs {r}, KKT residual {kkt:e}"));
                }
            }
            _ => tally.fail(format!("case {case}: evaluation failed")),
        }
    }
    tally.finish("quadratic-gap-kkt", "relative difference and KKT residual")
}

fn rate_fit_planted(_: &Options) -> CheckOutcome {
    let mut tally = Tally::new(0.02);
    for exponent in [-1.0, -0.5] {
        let pts: Vec<(f64, f64)> = [256.0, 1024.0, 4096.0, 16384.0]
            .into_iter()
            .map(|t: f64| (t, 3.0 * t.powf(exponent)))
            .collect();
        match metrics::rate_fit(&pts) {
            Ok(fit) => {
                tally.record((fit.slope - exponent).abs());
            }
            Err(e) => tally.fail(e.to_string()),
        }
    }
    tally.finish("rate-fit-planted", "|fitted − planted| exponent")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_filter_selects_lemma1_only() {
        let names: Vec<&str> = all_checks().iter().map(|c| c.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        let lemma: Vec<&str> = names.iter().copied().filter(|n| n.contains("lemma1")).collect();
        assert_eq!(lemma, ["lemma1-boundedness"]);
    }

    #[test]
    fn unclamped_mutant_is_caught() {
        let opts = Options {
            closed_form: unclamped_closed_form,
        };
        assert!(!closed_form_equivalence(&opts).passed);
        assert!(closed_form_equivalence(&Options::default()).passed);
    }

    #[test]
    fn dyadic_points_sum_exactly_to_one() {
        let mut r = rng(5);
        for d in 1..8 {
            let z = dyadic_simplex_point(&mut r, d);
            assert_eq!(z.iter().sum::<f64>(), 1.0);
            assert!(z.iter().all(|v| *v >= 0.0));
        }
    }
}
