use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

fn rte(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rte"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn small_config() -> Value {
    json!({
        "grid": {"lengths": [1.0, 1.0], "cells": [6, 5], "directions": 8, "dt": 0.05, "t_final": 0.4},
        "medium": {"c": 1.0, "mu_a": 0.5, "mu_s": 1.0},
        "kernel": {"type": "henyey_greenstein", "g": 0.5},
        "sources": {
            "initial": {"type": "expression", "expr": "1 + 0.5 * sin(pi * x1) * cos(theta)"},
            "inflow": {"type": "expression", "expr": "exp(-t) * (1 + x1 * x2)"},
            "q": {"type": "constant", "value": 0.1}
        },
        "output": {"snapshot_times": [0.2, 0.4]}
    })
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn check_reports_phantom_preset() {
    let out = rte(&["check", "--config", preset("phantom2d.json").to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("CFL lhs 0.392000  pass"), "{stdout}");
    assert!(stdout.contains("theta condition pass"), "{stdout}");
    assert!(stdout.contains("threshold 31.7111"), "{stdout}");
    assert!(stdout.contains("rho 0.9985423"), "{stdout}");

    let out = rte(&["check", "--config", preset("phantom2d_desk.json").to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout.contains("CFL lhs 0.196000  pass"), "{stdout}");
    assert!(stdout.contains("rho 0.9933115"), "{stdout}");
}

#[test]
fn failing_cfl_is_refused_unless_forced() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["grid"]["dt"] = json!(0.2);
    let config = write_config(tmp.path(), &cfg);
    let out_dir = tmp.path().join("refused");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let m = manifest(&out_dir);
    assert_eq!(m["status"], "refused");
    assert!(m["failure_reason"].as_str().unwrap().contains("CFL"));
    assert_eq!(m["stability_report"]["cfl_pass"], false);
    assert!(m["files"].as_array().unwrap().is_empty());

    let forced = tmp.path().join("forced");
    let out = rte(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        forced.to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&forced);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["forced"], true);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(rte(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rte(&[]).status.code(), Some(1));
    assert_eq!(rte(&["run"]).status.code(), Some(1));
    assert_eq!(rte(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_names_the_key_and_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg["medium"]["c"] = json!(true);
    let config = write_config(tmp.path(), &cfg);
    let out_dir = tmp.path().join("o");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("medium.c"), "{stderr}");
    let m = manifest(&out_dir);
    assert_eq!(m["status"], "failed");
    assert!(m["failure_reason"].as_str().unwrap().contains("medium.c"));
    assert_eq!(m["config"]["medium"]["c"], true);

    cfg = small_config();
    cfg["grid"]["cells"] = json!([6, 0]);
    let config = write_config(tmp.path(), &cfg);
    let out = rte(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.cells[1]"));

    let out = rte(&["check", "--config", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_writes_snapshots_with_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &small_config());
    let out_dir = tmp.path().join("run");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["steps"], 8);
    assert_eq!(m["bound_holds"], true);
    assert_eq!(m["positive"], true);
    assert_eq!(m["histories"]["sup_norm"].as_array().unwrap().len(), 9);
    assert_eq!(m["config"]["steady"]["tol"], 1e-12);

    let names: Vec<&str> = m["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    for n in ["snapshot_k4.csv", "intensity_k4.csv", "snapshot_k8.csv", "intensity_k8.csv", "history.csv"] {
        assert!(names.contains(&n), "{n} missing from {names:?}");
    }
    for f in m["files"].as_array().unwrap() {
        let bytes = std::fs::read(out_dir.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }

    let (header, rows) = read_csv(&out_dir.join("snapshot_k8.csv"));
    assert_eq!(header, ["i", "j", "n", "x1", "x2", "theta", "I"]);
    assert_eq!(rows.len(), 7 * 6 * 8);
    let sup = rows.iter().map(|r| r[6].abs()).fold(0.0, f64::max);
    let (_, history) = read_csv(&out_dir.join("history.csv"));
    assert_eq!(history.len(), 9);
    assert_eq!(sup, history[8][2]);

    let (header, rows) = read_csv(&out_dir.join("intensity_k8.csv"));
    assert_eq!(header, ["i", "j", "x1", "x2", "phi_total"]);
    assert_eq!(rows.len(), 7 * 6);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &small_config());
    let mut hashes = Vec::new();
    for threads in ["1", "3"] {
        let dir = tmp.path().join(format!("t{threads}"));
        let out = rte(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(out.status.code(), Some(0));
        let m = manifest(&dir);
        assert_eq!(m["threads"].as_u64().unwrap().to_string(), threads);
        hashes.push(m["files"].clone());
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn unit_field_integrates_to_two_pi() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": {"lengths": [1.0, 1.0], "cells": [4, 4], "directions": 12, "dt": 0.1, "t_final": 0.1},
        "medium": {"c": 1.0, "mu_a": 0.5, "mu_s": 1.0},
        "kernel": {"type": "isotropic"},
        "sources": {
            "q": {"type": "constant", "value": 0.5},
            "initial": {"type": "constant", "value": 1.0},
            "inflow": {"type": "constant", "value": 1.0}
        },
        "output": {"snapshot_times": [0.1]}
    });
    let config = write_config(tmp.path(), &cfg);
    let dir = tmp.path().join("o");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.join("intensity_k1.csv"));
    for r in rows {
        assert!((r[4] - 2.0 * PI).abs() < 1e-13, "{r:?}");
    }
}

#[test]
fn empty_sources_give_zero_field() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.as_object_mut().unwrap().remove("sources");
    let config = write_config(tmp.path(), &cfg);
    let dir = tmp.path().join("o");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.join("snapshot_k8.csv"));
    assert_eq!(rows.len(), 7 * 6 * 8);
    assert!(rows.iter().all(|r| r[6] == 0.0));
}

#[test]
fn steady_manifest_has_residual_history_and_rho() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": {"lengths": [1.0, 1.0], "cells": [5, 5], "directions": 8, "dt": 0.1, "t_final": 1.0},
        "medium": {"c": 1.0, "mu_a": 1.0, "mu_s": 1.0},
        "kernel": {"type": "isotropic"},
        "sources": {
            "q": {"type": "expression", "expr": "1 + x1"},
            "inflow": {"type": "constant", "value": 0.5}
        },
        "steady": {"tol": 1e-11}
    });
    let config = write_config(tmp.path(), &cfg);
    let dir = tmp.path().join("o");
    let out = rte(&["steady", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir);
    assert_eq!(m["converged"], true);
    let rho = m["rho"].as_f64().unwrap();
    assert!(rho > 0.0 && rho < 1.0);
    let res: Vec<f64> = m["histories"]["residual"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(res.len(), m["steps"].as_u64().unwrap() as usize);
    assert!(*res.last().unwrap() <= 1e-11);
    assert!(res.windows(2).skip(1).all(|w| w[1] <= rho * w[0] * (1.0 + 1e-9)));
    assert!(m["histories"]["error"].is_array());
    let k = m["steps"].as_u64().unwrap();
    assert!(dir.join(format!("snapshot_k{k}.csv")).is_file());
    assert!(dir.join("residuals.csv").is_file());
}

#[test]
fn steady_rejects_time_dependent_data() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &small_config());
    let dir = tmp.path().join("o");
    let out = rte(&["steady", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(&dir);
    assert_eq!(m["status"], "failed");
    assert!(m["failure_reason"].as_str().unwrap().contains("time"));
}

#[test]
fn convergence_mode_writes_studies() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "grid": {"lengths": [1.0, 1.0], "cells": [4, 4], "directions": 16, "dt": 0.05, "t_final": 0.2},
        "medium": {"c": 1.0, "mu_a": 0.5, "mu_s": 1.0},
        "kernel": {"type": "henyey_greenstein", "g": 0.3},
        "convergence": {"levels": 3, "angular": [8, 12, 16]}
    });
    let config = write_config(tmp.path(), &cfg);
    let dir = tmp.path().join("o");
    let out = rte(&["convergence", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir);
    let studies = m["convergence"].as_array().unwrap();
    assert_eq!(studies.len(), 2);
    assert_eq!(studies[0]["kind"], "space_time");
    assert!(studies[0]["order"].as_f64().unwrap() > 0.5);
    let (header, rows) = read_csv(&dir.join("convergence_space_time.csv"));
    assert_eq!(header, ["level", "dt", "dx1", "dx2", "dtheta", "error"]);
    assert_eq!(rows.len(), 3);
    assert!(dir.join("convergence_angular.csv").is_file());
}

#[test]
fn three_dimensional_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "dimension": 3,
        "grid": {"lengths": [1.0, 1.0, 1.0], "cells": [3, 3, 3], "polar": 6, "azimuthal": 12, "dt": 0.05, "t_final": 0.1},
        "medium": {"c": 1.0, "mu_a": 0.5, "mu_s": "1 + 0.5 * x3"},
        "kernel": {"type": "henyey_greenstein", "g": 0.2},
        "sources": {"inflow": {"type": "expression", "expr": "1 + xi3 * xi3"}}
    });
    let config = write_config(tmp.path(), &cfg);
    let dir = tmp.path().join("o");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ndir = 2 + 5 * 12;
    let (header, rows) = read_csv(&dir.join("snapshot_k2.csv"));
    assert_eq!(header, ["i", "j", "l", "m", "n", "x1", "x2", "x3", "theta", "phi", "I"]);
    assert_eq!(rows.len(), 64 * ndir);
    let m = manifest(&dir);
    assert_eq!(m["stability_report"]["dimension"], 3);
}

#[test]
fn echoed_config_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), &small_config());
    let first = tmp.path().join("a");
    let out = rte(&["run", "--config", config.to_str().unwrap(), "--out", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&first);
    let echo = tmp.path().join("echo.json");
    std::fs::write(&echo, serde_json::to_string(&m["config"]).unwrap()).unwrap();
    let second = tmp.path().join("b");
    let out = rte(&["run", "--config", echo.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let again = manifest(&second);
    assert_eq!(m["files"], again["files"]);
    assert_eq!(m["config"], again["config"]);
}
