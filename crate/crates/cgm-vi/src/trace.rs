//! Per-iteration CSV output.
//!
//! Row `t` describes the solver output after step `t`: the running average
//! over `x_0..x_t`, or `x_{t+1}` for last-iterate runs. `v_norm`,
//! `active_count` and `delta` belong to the step taken at `x_t`. Rows are
//! flushed as they are written so a crashed or interrupted run keeps its
//! prefix.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use cgm_core::metrics::GapEvaluator;
use cgm_core::solver::{IterationInfo, Observer};
use cgm_core::{linalg, ProblemInstance};

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: &str = "t,feasibility,gap,v_norm,active_count,delta";

pub struct TraceWriter<'a> {
    problem: &'a ProblemInstance,
    gap: &'a GapEvaluator,
    trace: csv::Writer<BufWriter<File>>,
    trace_path: PathBuf,
    iterates: Option<(csv::Writer<BufWriter<File>>, PathBuf)>,
    failure: Option<CliError>,
}

impl<'a> TraceWriter<'a> {
    /// Creates `trace.csv` (and `iterates.csv` when asked) in `dir`.
    pub fn create(dir: &Path, problem: &'a ProblemInstance, gap: &'a GapEvaluator, iterates: bool) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let trace_path = dir.join("trace.csv");
        let mut trace = open(&trace_path)?;
        trace.write_record(TRACE_HEADER.split(','))?;
        trace.flush().map_err(|e| CliError::io(&trace_path, e))?;
        let iterates = if iterates {
            let path = dir.join("iterates.csv");
            let mut w = open(&path)?;
            let mut header = vec!["t".to_string()];
            header.extend((0..problem.dim()).map(|i| format!("x{i}")));
            w.write_record(&header)?;
            w.flush().map_err(|e| CliError::io(&path, e))?;
            Some((w, path))
        } else {
            None
        };
        Ok(Self {
            problem,
            gap,
            trace,
            trace_path,
            iterates,
            failure: None,
        })
    }

    pub fn trace_path(&self) -> &Path {
        &self.trace_path
    }

    /// The write error that aborted the run, if any.
    pub fn take_failure(&mut self) -> Option<CliError> {
        self.failure.take()
    }

    fn write_row(&mut self, info: &IterationInfo<'_>) -> CliResult<()> {
        let gap = self.gap.gap(self.problem, info.output);
        let feasibility = self.problem.feasibility(info.output);
        let rec = info.record;
        self.trace.write_record([
            info.t.to_string(),
            fmt(feasibility),
            gap.map(fmt).unwrap_or_default(),
            fmt(linalg::norm(&rec.v)),
            rec.active_count.to_string(),
            fmt(rec.delta),
        ])?;
        self.trace.flush().map_err(|e| CliError::io(&self.trace_path, e))?;
        if let Some((w, path)) = &mut self.iterates {
            if info.t == 0 {
                write_point(w, 0, &rec.x)?;
            }
            write_point(w, info.t + 1, info.next)?;
            w.flush().map_err(|e| CliError::io(&*path, e))?;
        }
        Ok(())
    }
}

impl Observer for TraceWriter<'_> {
    fn observe(&mut self, info: &IterationInfo<'_>) -> cgm_core::Result<()> {
        self.write_row(info).map_err(|e| {
            let msg = e.to_string();
            self.failure = Some(e);
            cgm_core::Error::InvalidArgument(msg)
        })
    }
}

fn open(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn write_point(w: &mut csv::Writer<BufWriter<File>>, t: usize, x: &[f64]) -> CliResult<()> {
    let mut row = Vec::with_capacity(x.len() + 1);
    row.push(t.to_string());
    row.extend(x.iter().map(|v| fmt(*v)));
    w.write_record(&row)?;
    Ok(())
}

/// Shortest round-tripping decimal.
fn fmt(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use cgm_core::problems::make_forsaken;
    use cgm_core::solver::{cgm_run_with_observer, SolverConfig};

    #[test]
    fn writes_exact_header_and_one_row_per_step() {
        let dir = tempfile::tempdir().unwrap();
        let p = make_forsaken();
        let gap = GapEvaluator::for_problem(&p).unwrap();
        let mut w = TraceWriter::create(dir.path(), &p, &gap, true).unwrap();
        cgm_run_with_observer(&p, &SolverConfig::new(5, 0.1, 2.0), &mut w).unwrap();
        drop(w);
        let text = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("0,"));
        let iterates = std::fs::read_to_string(dir.path().join("iterates.csv")).unwrap();
        assert_eq!(iterates.lines().count(), 7);
        assert!(iterates.starts_with("t,x0,x1\n"));
    }
}
