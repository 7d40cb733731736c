use std::process::Command;

fn mincurv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mincurv"))
}

#[test]
fn formula_prints_exact_multiple() {
    let out = mincurv().args(["formula", "--genus", "0", "--ends", "0,0"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "-2*2*pi");
    let out = mincurv().args(["formula", "--genus", "0", "--ends", "0"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0");
}

#[test]
fn solve_then_ledger_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    std::fs::write(p("end.json"), r#"{"m": 0, "c": 0.0, "R": 2.0}"#).unwrap();
    let st = mincurv()
        .args([
            "end-solve",
            "--end",
            &p("end.json"),
            "--grid",
            "64,64",
            "--Rout",
            "20",
            "--bc-inner",
            "0.5",
            "--out",
            &p("xi.csv"),
        ])
        .status()
        .unwrap();
    assert!(st.success());
    let st = mincurv()
        .args(["gauss-bonnet", "--end", &p("end.json"), "--xi", &p("xi.csv"), "--C", "3", "--out", &p("gb.json")])
        .status()
        .unwrap();
    assert!(st.success());
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("gb.json")).unwrap()).unwrap();
    assert!(rep["defect"].as_f64().unwrap().abs() < 0.126);
    assert_eq!(rep["vertices"].as_array().unwrap().len(), 4);
    assert!(rep["boundary_terms"].as_array().unwrap().len() >= 5);
}

#[test]
fn run_exit_code_follows_acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let write = |expect: i64| {
        let text = format!(
            r#"{{"schema_version": 1, "output_dir": "out", "checks": {{"formula": [{{"genus": 0, "n": 1, "ms": [0], "expect": {expect}}}]}}}}"#
        );
        std::fs::write(&cfg, text).unwrap();
    };
    write(0);
    let out = mincurv().args(["run", "--config"]).arg(&cfg).env("MINCURV_THREADS", "2").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS formula"));
    write(1);
    let out = mincurv().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL formula"));
}

#[test]
fn bad_inputs_exit_with_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{ \"schema_version\": 1, ").unwrap();
    let out = mincurv().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("CONFIG_INVALID"));

    std::fs::write(&cfg, r#"{"schema_version": 1, "output_dir": "o"}"#).unwrap();
    let out = mincurv().args(["run", "--config"]).arg(&cfg).env("MINCURV_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lift_writes_polygon_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    std::fs::write(p("end.json"), r#"{"m": 1, "c": 0.5, "R": 3.0}"#).unwrap();
    let st = mincurv()
        .args([
            "lift",
            "--end",
            &p("end.json"),
            "--C",
            "30",
            "--step",
            "0.05",
            "--out",
            &p("p.csv"),
            "--svg",
            &p("p.svg"),
        ])
        .status()
        .unwrap();
    assert!(st.success());
    let csv = std::fs::read_to_string(p("p.csv")).unwrap();
    assert!(csv.starts_with("t,z_re,z_im,sector_k,arc_class\n"));
    assert!(csv.contains("Bstar"));
    assert_eq!(std::fs::read_to_string(p("p.svg")).unwrap().matches("<circle").count(), 10);
}
