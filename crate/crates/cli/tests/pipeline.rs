use std::path::Path;

use mincurv_cli::config::ExperimentConfig;
use mincurv_cli::manifest::StageStatus;
use mincurv_cli::{run_pipeline, HarnessError};
use serde_json::json;

fn parse(v: serde_json::Value, dir: &Path) -> mincurv_cli::Result<ExperimentConfig> {
    ExperimentConfig::parse(&v.to_string(), dir)
}

#[test]
fn formula_only_config_gives_three_pass_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(
        json!({
            "schema_version": 1,
            "output_dir": "out",
            "checks": {"formula": [
                {"genus": 0, "n": 1, "ms": [0], "expect": 0},
                {"genus": 0, "n": 2, "ms": [0, 0], "expect": -2},
                {"genus": 0, "n": 1, "ms": [3], "expect": -3}
            ]}
        }),
        dir.path(),
    )
    .unwrap();
    let man = run_pipeline(&cfg).unwrap();
    assert_eq!(man.acceptance.len(), 3);
    assert!(man.all_pass());
    assert_eq!(man.acceptance_table().lines().filter(|l| l.starts_with("PASS")).count(), 3);
    assert!(dir.path().join("out/manifest.json").is_file());
}

#[test]
fn flat_benchmark_records_small_defect() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(
        json!({
            "schema_version": 1,
            "output_dir": "flat",
            "ends": [{"m": 1, "c": 0.0, "R": 1.5}],
            "grid": {"n_r": 256, "n_theta": 256, "r_out": 4.0},
            "solver": {"kind": "flat"},
            "C_schedule": [4.0, 6.0],
            "checks": {"defect_tol": 1e-3}
        }),
        dir.path(),
    )
    .unwrap();
    let man = run_pipeline(&cfg).unwrap();
    assert!(man.all_pass(), "{}", man.acceptance_table());
    let defects: Vec<_> = man.acceptance.iter().filter(|r| r.check.ends_with("defect")).collect();
    assert_eq!(defects.len(), 2);
    assert!(defects.iter().all(|r| r.value < 1e-3));
    // Every emitted file is listed, and the manifest itself is not.
    let mut on_disk: Vec<_> = std::fs::read_dir(dir.path().join("flat"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<_> = man.artifacts.iter().map(|a| a.path.to_string_lossy().into_owned()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn solved_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bc.csv"),
        (0..32).fold("theta,xi\n".to_string(), |s, j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / 32.0;
            s + &format!("{t:.17e},{}\n", 0.4 + 0.2 * t.cos())
        }),
    )
    .unwrap();
    let config = |out: &str| {
        json!({
            "schema_version": 1,
            "output_dir": out,
            "seed": 7,
            "metric": {"alpha": {"kind": "const", "value": 1.0}, "bounds": {"a": 1.0, "b": 1.0}, "samples": 50},
            "ends": [{"m": 0, "c": 0.0, "R": 2.0}],
            "grid": {"n_r": 96, "n_theta": 32, "r_out": 20.0},
            "solver": {"kind": "sinh_gordon", "bc_inner": "bc.csv"},
            "C_schedule": [3.0, 6.0, 12.0],
            "lift_step": 0.05,
            "catenoid": {"A": 1.0, "k": 1.0, "s_max": 5.0, "samples": 200},
            "compare": {"G": {"kind": "sinh_squared", "k": 1.0}, "k1": 1.5, "k2": 0.5, "A": 0.1},
            "checks": {"boundary_decay": {"final_below": 0.05}}
        })
    };
    let a = run_pipeline(&parse(config("a"), dir.path()).unwrap()).unwrap();
    let b = run_pipeline(&parse(config("b"), dir.path()).unwrap()).unwrap();
    assert!(a.all_pass(), "{}", a.acceptance_table());
    assert!(a.stages.iter().all(|s| s.status == StageStatus::Ok));
    assert_eq!(a.artifacts, b.artifacts);
    assert!(a.acceptance.iter().any(|r| r.check.contains("oddness")));
    assert!(a.acceptance.iter().any(|r| r.check.contains("boundary curvature decreasing")));
}

#[test]
fn failed_stage_skips_downstream_and_fails_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(
        json!({
            "schema_version": 1,
            "output_dir": "bad",
            // R is below the radius bound for c = 0.3, so tracing and lifting refuse it.
            "ends": [{"m": 0, "c": 0.3, "R": 4.0}],
            "grid": {"n_r": 32, "n_theta": 16, "r_out": 10.0},
            "solver": {"kind": "flat"},
            "C_schedule": [10.0]
        }),
        dir.path(),
    )
    .unwrap();
    let man = run_pipeline(&cfg).unwrap();
    assert!(!man.all_pass());
    let status = |n: &str| man.stages.iter().find(|s| s.name == n).unwrap().status;
    assert_eq!(status("trace[0]"), StageStatus::Failed);
    assert_eq!(status("lift[0]"), StageStatus::Skipped);
    assert_eq!(status("ledger[0]"), StageStatus::Skipped);
    assert_eq!(status("solve[0]"), StageStatus::Ok);
}

#[test]
fn malformed_json_reports_position() {
    let err = ExperimentConfig::parse(
        "{\n  \"schema_version\": 1,\n  \"output_dir\": \"x\"\n  \"seed\": 3\n}",
        Path::new("."),
    )
    .unwrap_err();
    match err {
        HarnessError::ConfigInvalid { line, column, .. } => assert_eq!((line, column), (4, 3)),
        e => panic!("{e}"),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        json!({"schema_version": 2, "output_dir": "x"}),
        json!({"schema_version": 1, "output_dir": "x", "surprise": true}),
        json!({"schema_version": 1, "output_dir": "x", "ends": [{"m": 0, "c": 0.0, "R": 2.0}], "C_schedule": [3.0, 3.0]}),
        json!({"schema_version": 1, "output_dir": "x", "ends": [{"m": 0, "c": 0.0, "R": 2.0}],
               "grid": {"n_r": 32, "n_theta": 16, "r_out": 10.0},
               "solver": {"kind": "sinh_gordon", "bc_inner": "missing.csv"}}),
        json!({"schema_version": 1, "output_dir": "x", "solver": {"kind": "flat"}}),
        json!({"schema_version": 1, "output_dir": "x", "checks": {"formula": [{"genus": 0, "n": 2, "ms": [0], "expect": 0}]}}),
    ];
    for v in bad {
        let e = parse(v.clone(), dir.path()).unwrap_err();
        assert!(matches!(e, HarnessError::ConfigInvalid { .. }), "{v}: {e}");
        assert!(e.to_string().starts_with("CONFIG_INVALID"));
    }
}
