//! `sweep-rates`: runs a horizon sweep and fits `log gap ~ log T`.

use std::collections::BTreeMap;

use cgm_core::metrics::{self, RateFit};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::run::RunSummary;

#[derive(Clone, Debug, Serialize)]
pub struct SlopeReport {
    /// The sweep point with the horizon removed, e.g. `seed=3`.
    pub group: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    /// Two-sided 95% Student-t interval on the slope, `n − 2` degrees of freedom.
    pub ci95: Option<[f64; 2]>,
    pub r_squared: f64,
    pub points: Vec<(usize, f64)>,
    pub in_range: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub name: String,
    pub gap_kind: Option<&'static str>,
    pub slope_range: Option<[f64; 2]>,
    pub mean_slope: f64,
    pub groups: Vec<SlopeReport>,
    pub passed: bool,
}

/// Checks that `config` describes a rate sweep.
pub fn validate(config: &RunConfig) -> CliResult<()> {
    let horizons = config
        .sweep
        .as_ref()
        .and_then(|s| s.iterations.as_ref())
        .ok_or_else(|| CliError::config("sweep.iterations is required for sweep-rates"))?;
    let mut distinct = horizons.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(CliError::config("sweep.iterations needs at least 3 distinct horizons"));
    }
    if let Some([lo, hi]) = config.sweep.as_ref().and_then(|s| s.slope_range) {
        if !(lo <= hi) {
            return Err(CliError::config("sweep.slope_range must be [low, high] with low ≤ high"));
        }
    }
    Ok(())
}

fn group_of(run_id: &str) -> String {
    let rest: Vec<&str> = run_id.split('_').filter(|part| !part.starts_with("T=")).collect();
    if rest.is_empty() {
        "all".to_string()
    } else {
        rest.join("_")
    }
}

fn confidence_interval(fit: &RateFit) -> Option<[f64; 2]> {
    let dof = fit.points.checked_sub(2).filter(|d| *d > 0)? as f64;
    let t = StudentsT::new(0.0, 1.0, dof).ok()?.inverse_cdf(0.975);
    let half = t * fit.slope_std_error;
    Some([fit.slope - half, fit.slope + half])
}

/// Fits one slope per sweep group from finished runs.
pub fn fit(config: &RunConfig, runs: &[RunSummary]) -> CliResult<RateReport> {
    let range = config.sweep.as_ref().and_then(|s| s.slope_range);
    let mut groups: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in runs {
        let gap = r
            .final_gap
            .ok_or_else(|| CliError::config(format!("run {}: instance has no gap evaluator", r.run_id)))?;
        groups
            .entry(group_of(&r.run_id))
            .or_default()
            .push((r.config.iterations, gap));
    }
    let mut reports = Vec::new();
    for (group, mut points) in groups {
        points.sort_by_key(|p| p.0);
        let xy: Vec<(f64, f64)> = points.iter().map(|&(t, g)| (t as f64, g)).collect();
        let fit = metrics::rate_fit(&xy).map_err(|e| CliError::Failed(format!("group {group}: {e}")))?;
        reports.push(SlopeReport {
            group,
            slope: fit.slope,
            intercept: fit.intercept,
            slope_std_error: fit.slope_std_error,
            ci95: confidence_interval(&fit),
            r_squared: fit.r_squared,
            points,
            in_range: range.map(|[lo, hi]| (lo..=hi).contains(&fit.slope)),
        });
    }
    let mean_slope = reports.iter().map(|r| r.slope).sum::<f64>() / reports.len().max(1) as f64;
    Ok(RateReport {
        name: config.name.clone(),
        gap_kind: runs.first().and_then(|r| r.gap_kind),
        slope_range: range,
        mean_slope,
        passed: reports.iter().all(|r| r.in_range != Some(false)),
        groups: reports,
    })
}
