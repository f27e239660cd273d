use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cgm-vi"));
    c.env_remove("CGM_VI_THREADS");
    c
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// A bundled config with its output redirected into `dir`.
fn relocated(name: &str, dir: &Path) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(bundled(name)).unwrap()).unwrap();
    v["output"]["dir"] = Value::String(dir.join("out").to_string_lossy().into_owned());
    let path = dir.join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text.replace("OUT", &dir.join("out").to_string_lossy())).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn quad_game_small_writes_trace_and_summary_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = relocated("quad_game_small.json", dir.path());
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let trace_path = dir.path().join("out/trace.csv");
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("t,feasibility,gap,v_norm,active_count,delta"));
    assert_eq!(lines.count(), 1000);

    let summary_path = dir.path().join("out/summary.json");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(&summary_path).unwrap()).unwrap();
    for key in ["final_gap", "final_feasibility", "wall_time_seconds", "config"] {
        assert!(summary.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(summary["config"]["problem"]["d"], 50);
    assert_eq!(summary["config"]["alpha"], 50.0);
    let final_gap = summary["final_gap"].as_f64().unwrap();
    assert!(final_gap <= 0.1 * summary["initial_gap"].as_f64().unwrap());

    // the summary is itself a loadable config and replays bit-identically
    let before = std::fs::read(&trace_path).unwrap();
    let replay = bin().arg("run").arg(&summary_path).output().unwrap();
    assert!(replay.status.success(), "{}", stderr(&replay));
    assert_eq!(std::fs::read(&trace_path).unwrap(), before);
}

#[test]
fn forsaken_sweep_writes_one_trajectory_per_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = relocated("forsaken_alpha_sweep.json", dir.path());
    let out = bin().arg("run").arg(&cfg).env("CGM_VI_THREADS", "2").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    for alpha in ["0.5", "2", "8"] {
        let run = dir.path().join(format!("out/alpha={alpha}"));
        let iterates = std::fs::read_to_string(run.join("iterates.csv")).unwrap();
        assert!(iterates.starts_with("t,x0,x1\n0,0.5,1.0\n"), "{iterates:.40}");
        assert_eq!(iterates.lines().count(), 66);
        assert!(run.join("trace.csv").exists() && run.join("summary.json").exists());
    }
    let index: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/sweep.json")).unwrap()).unwrap();
    assert_eq!(index["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_sweep_list_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name": "e", "problem": {"generator": "forsaken"}, "iterations": 4,
            "schedule": {"kind": "constant", "eta": 0.1}, "alpha": 1, "seed": 0,
            "output": {"dir": "OUT"}, "sweep": {"alpha": []}}"#,
    );
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sweep.alpha"), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"name": "u", "problem": {"generator": "forsaken"}, "iterations": 4,
             "schedule": {"kind": "constant", "eta": 0.1}, "alpha": 1, "seed": 0, "colour": 1}"#, "colour"),
        (r#"{"name": "s", "problem": {"generator": "quad_game", "d": 3}, "iterations": 4,
             "schedule": {"kind": "constant", "eta": 0.1}, "alpha": 1, "seed": 0}"#, "seed"),
        (r#"{"name": "g", "problem": {"generator": "no_such_thing"}, "iterations": 4,
             "schedule": {"kind": "constant", "eta": 0.1}, "alpha": 1, "seed": 0}"#, "no_such_thing"),
        (r#"{"name": "a", "problem": {"generator": "forsaken"}, "iterations": 4,
             "schedule": {"kind": "constant", "eta": 0.1}, "alpha": -1, "seed": 0}"#, "alpha"),
        ("not json", "malformed"),
    ];
    for (text, needle) in cases {
        let cfg = write_config(dir.path(), text);
        let out = bin().arg("run").arg(&cfg).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{text}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{needle}: {}", stderr(&out));
    }
    let missing = bin().arg("run").arg(dir.path().join("absent.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn solver_error_exits_1_with_iteration_and_parseable_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name": "diverge", "problem": {"generator": "quad_game", "d": 5, "seed": 1},
            "iterations": 2000, "schedule": {"kind": "constant", "eta": 100}, "alpha": 1,
            "seed": 0, "start": "gaussian", "output": {"dir": "OUT"}}"#,
    );
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("iteration "), "{}", stderr(&out));

    let mut reader = csv::Reader::from_path(dir.path().join("out/trace.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["t", "feasibility", "gap", "v_norm", "active_count", "delta"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert!(!rows.is_empty() && rows.len() < 2000);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
    }
}

#[test]
fn threads_env_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = relocated("ball_minimization.json", dir.path());
    let out = bin().arg("run").arg(&cfg).env("CGM_VI_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("CGM_VI_THREADS"));
    let ok = bin().arg("run").arg(&cfg).env("CGM_VI_THREADS", "1").output().unwrap();
    assert!(ok.status.success(), "{}", stderr(&ok));
}

#[test]
fn validate_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = bin().arg("validate").arg("--report").arg(&report).output().unwrap();
    assert!(out.status.success(), "{}", stdout(&out));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert!(json["checks"].as_array().unwrap().len() >= 12);
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn validate_filter_runs_only_boundedness() {
    let out = bin().args(["validate", "--filter", "lemma1"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains("lemma1-boundedness"));
    let unknown = bin().args(["validate", "--filter", "nothing-matches"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn unclamped_closed_form_mutant_is_caught() {
    let out = bin()
        .args(["validate", "--mutant", "unclamped", "--filter", "closed-form"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL closed-form-equivalence"));
}

#[test]
fn sweep_rates_reports_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name": "r", "problem": {"generator": "strongly_monotone_ball", "d": 5, "seed": 1},
            "iterations": 64, "schedule": {"kind": "theorem2"}, "gamma": 3.0, "seed": 1,
            "start": "feasible", "output": {"dir": "OUT"},
            "sweep": {"iterations": [128, 512, 2048], "seeds": [1, 2], "slope_range": [-1.25, -0.75]}}"#,
    );
    let out = bin().arg("sweep-rates").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}{}", stdout(&out), stderr(&out));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/rates.json")).unwrap()).unwrap();
    let groups = report["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    for g in groups {
        let slope = g["slope"].as_f64().unwrap();
        assert!((-1.25..=-0.75).contains(&slope), "{slope}");
    }
}

#[test]
fn malformed_rate_sweep_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name": "r", "problem": {"generator": "forsaken"}, "iterations": 64,
            "schedule": {"kind": "constant", "eta": 0.1}, "alpha": 1, "seed": 0,
            "output": {"dir": "OUT"}, "sweep": {"iterations": [64, 128]}}"#,
    );
    let out = bin().arg("sweep-rates").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sweep.iterations"));
}
