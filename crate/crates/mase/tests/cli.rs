use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mase::output::{read_columns, verify_manifest};
use serde_json::{json, Value};
use tempfile::TempDir;

fn mase(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mase"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MASE_OUT_ROOT")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_json(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Relative paths and bytes of every file under `root`, sorted.
fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn small_gaussian() -> Value {
    json!({
        "grid": {"n_points": 64, "length": 20.0},
        "initial": {"kind": "gaussian", "amplitude": 0.1, "center": 10.0, "width": 2.0},
        "solver": {"t_end": 1.0, "snapshot_interval": 0.25}
    })
}

#[test]
fn zero_run_stays_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "grid": {"n_points": 32, "length": 10.0},
        "initial": {"kind": "zero"},
        "solver": {"t_end": 1.0, "snapshot_interval": 0.25},
        "analysis": {"symmetry": true}
    });
    let path = write_json(tmp.path(), "zero.json", &cfg);
    ok(&mase(&["simulate", "--config", path.to_str().unwrap(), "--out", "run"], tmp.path()));
    let run = tmp.path().join("run");
    let manifest = verify_manifest(&run).unwrap();
    assert_eq!(manifest.status.as_deref(), Some("completed"));
    assert_eq!(manifest.input, cfg);
    let snaps: Vec<_> = manifest.files.iter().filter(|f| f.path.starts_with("snapshots/")).collect();
    assert_eq!(snaps.len(), 5);
    for s in snaps {
        let (x, u) = read_columns(&run.join(&s.path)).unwrap();
        assert_eq!(x.len(), 32);
        assert!(u.iter().all(|v| *v == 0.0));
    }
    // the undefined axis is a note during simulate and an error on its own
    assert!(manifest.notes.iter().any(|n| n.contains("axis")));
    let out = mase(&["symmetry", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=undefined_axis:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn solitary_run_keeps_its_height_and_passes_symmetry() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "grid": {"n_points": 512, "length": 137.77},
        "initial": {"kind": "tw_profile", "c": 1.2},
        "solver": {"t_end": 2.0, "snapshot_interval": 0.5}
    });
    let path = write_json(tmp.path(), "tw.json", &cfg);
    ok(&mase(&["simulate", "--config", path.to_str().unwrap(), "--out", "run"], tmp.path()));
    let run = tmp.path().join("run");
    let text = fs::read_to_string(run.join("diagnostics.csv")).unwrap();
    let sup: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(sup.len(), 5);
    for s in &sup {
        assert!((s - sup[0]).abs() < 1e-3 * sup[0], "{s} vs {}", sup[0]);
    }
    let stdout = ok(&mase(&["symmetry", "run"], tmp.path()));
    assert!(stdout.contains("verdict=traveling_wave_consistent"), "{stdout}");
    let report = read(&run.join("symmetry.json"));
    assert!((report["speed_estimate"].as_f64().unwrap() - 1.2).abs() < 1e-3);
    // symmetry.json was added to the manifest with its digest
    let manifest = verify_manifest(&run).unwrap();
    assert!(manifest.files.iter().any(|f| f.path == "symmetry.json"));

    let stdout = ok(&mase(&["weakform", "run", "--seed", "7", "--count", "3"], tmp.path()));
    assert!(stdout.contains("count=3"));
    assert_eq!(read(&run.join("weakform.json"))["seed"], json!(7));
    assert_eq!(verify_manifest(&run).unwrap().seed, Some(7));
}

#[test]
fn steep_gaussian_breaks_with_exit_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "grid": {"n_points": 2048, "length": 2.5},
        "initial": {"kind": "gaussian", "amplitude": 0.1, "center": 1.25, "width": 0.1},
        "solver": {"t_end": 0.5, "snapshot_interval": 0.01, "dt_max": 0.001, "breaking_slope_threshold": 4.0}
    });
    let path = write_json(tmp.path(), "steep.json", &cfg);
    ok(&mase(&["simulate", "--config", path.to_str().unwrap(), "--out", "run"], tmp.path()));
    let run = tmp.path().join("run");
    let manifest = verify_manifest(&run).unwrap();
    assert_eq!(manifest.status.as_deref(), Some("breaking_detected"));
    let report = read(&run.join("breaking.json"));
    assert_eq!(report["detected"], json!(true));
    let t = report["t_detect"].as_f64().unwrap();
    assert!(t > 0.05 && t < 0.5, "{t}");
}

#[test]
fn flags_override_config() {
    let tmp = TempDir::new().unwrap();
    let path = write_json(tmp.path(), "g.json", &small_gaussian());
    ok(&mase(
        &["simulate", "--config", path.to_str().unwrap(), "--out", "run", "--set", "solver.t_end=0.5"],
        tmp.path(),
    ));
    let manifest = verify_manifest(&tmp.path().join("run")).unwrap();
    assert_eq!(manifest.input["solver"]["t_end"], json!(0.5));
    assert_eq!(manifest.files.iter().filter(|f| f.path.starts_with("snapshots/")).count(), 3);
}

#[test]
fn default_output_root_comes_from_environment() {
    let tmp = TempDir::new().unwrap();
    let path = write_json(tmp.path(), "g.json", &small_gaussian());
    let out = Command::new(env!("CARGO_BIN_EXE_mase"))
        .args(["simulate", "--config", path.to_str().unwrap()])
        .current_dir(tmp.path())
        .env("MASE_OUT_ROOT", tmp.path().join("root"))
        .output()
        .unwrap();
    ok(&out);
    assert!(tmp.path().join("root/simulate/manifest.json").is_file());
}

#[test]
fn invalid_config_is_one_line_nonzero() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_gaussian();
    cfg["solver"]["cfl"] = json!(-1.0);
    let path = write_json(tmp.path(), "bad.json", &cfg);
    let out = mase(&["simulate", "--config", path.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=invalid_config:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);

    let out = mase(&["simulate", "--out", "run", "--config", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error kind=io:"));
}

#[test]
fn tampered_file_fails_verification() {
    let tmp = TempDir::new().unwrap();
    let path = write_json(tmp.path(), "g.json", &small_gaussian());
    ok(&mase(&["simulate", "--config", path.to_str().unwrap(), "--out", "run"], tmp.path()));
    let run = tmp.path().join("run");
    verify_manifest(&run).unwrap();
    fs::write(run.join("diagnostics.csv"), "t,mean,sup_norm,max_slope\n").unwrap();
    assert!(verify_manifest(&run).is_err());
}

#[test]
fn solitary_tw_is_certified() {
    let tmp = TempDir::new().unwrap();
    let stdout = ok(&mase(&["tw", "--c", "1.2", "--out", "tw"], tmp.path()));
    assert!(stdout.contains("regularity=smooth_solitary"));
    let dir = tmp.path().join("tw");
    verify_manifest(&dir).unwrap();
    let info = read(&dir.join("profile.json"));
    assert_eq!(info["regularity"], json!("smooth_solitary"));
    assert!((info["singular_line"].as_f64().unwrap() + 2.2 / 14.0).abs() < 1e-15);
    let residual = info["steady_residual"]["max_abs_residual"].as_f64().unwrap();
    assert!(residual < 1e-4, "{residual}");
    let (xi, u) = read_columns(&dir.join("profile.csv")).unwrap();
    assert_eq!(xi.len(), 1024);
    let peak = u.iter().cloned().fold(0.0, f64::max);
    assert!((peak - info["amplitude"].as_f64().unwrap()).abs() < 1e-11);

    ok(&mase(&["weakform", "tw", "--seed", "1", "--count", "5"], tmp.path()));
    let report = read(&dir.join("weakform.json"));
    assert!(report["report"]["max_abs_residual"].as_f64().unwrap() < 1e-4);
}

/// Coefficients of `N = E - 2G` in ascending powers, written out from `F` directly.
fn level_coefficients(c: f64, a: f64, e: f64) -> [f64; 6] {
    [e, -2.0 * a, c - 1.0, -2.0, 1.0, -1.2]
}

fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Divides by `(x - r)`, dropping the remainder.
fn deflate(coeffs: &[f64], r: f64) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let mut q = vec![0.0; n];
    let mut carry = 0.0;
    for i in (0..n).rev() {
        carry = coeffs[i + 1] + carry * r;
        q[i] = carry;
    }
    q
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn periodic_tw_period_matches_quadrature() {
    let (c, a, e) = (1.2, 0.0, -2e-4);
    let tmp = TempDir::new().unwrap();
    let out = mase(&["tw", "--c", "1.2", "--a", "0", "--e", "-2e-4", "--n-points", "512", "--out", "p"], tmp.path());
    ok(&out);
    let info = read(&tmp.path().join("p/profile.json"));
    assert_eq!(info["regularity"], json!("smooth_periodic"));
    let period = info["period"].as_f64().unwrap();

    // U = lo + (hi - lo)(1 - cos t)/2 turns dxi = dU / sqrt(N/D) into a smooth
    // integrand 1/sqrt(M/D), M = -N/((U - lo)(U - hi)); trapezoid in t.
    let n = level_coefficients(c, a, e);
    let lo = bisect(|u| eval(&n, u), 0.01, 0.05);
    let hi = bisect(|u| eval(&n, u), 0.05, 0.1);
    let m = deflate(&deflate(&n, lo), hi);
    let steps = 4000;
    let mut sum = 0.0;
    for i in 0..=steps {
        let t = std::f64::consts::PI * i as f64 / steps as f64;
        let u = lo + 0.5 * (hi - lo) * (1.0 - t.cos());
        let g = 1.0 / (-eval(&m, u) / (c + 1.0 + 14.0 * u)).sqrt();
        sum += if i == 0 || i == steps { 0.5 * g } else { g };
    }
    let oracle = 2.0 * sum * std::f64::consts::PI / steps as f64;
    assert!((period - oracle).abs() < 1e-10 * oracle, "{period} vs {oracle}");
    assert!((info["window"].as_f64().unwrap() - period).abs() < 1e-12 * period);
}

#[test]
fn peaked_level_is_classified() {
    let tmp = TempDir::new().unwrap();
    // E = 2G(U_s) puts the crest on the singular line U_s = 1/7
    let us = 1.0f64 / 7.0;
    let g = -us + 2.0 * us.powi(2) + us.powi(3) - 0.5 * us.powi(4) + 0.6 * us.powi(5);
    let e = format!("{:e}", 2.0 * g);
    ok(&mase(&["tw", "--c", "-3", "--a", "-1", "--e", &e, "--out", "pk"], tmp.path()));
    let info = read(&tmp.path().join("pk/profile.json"));
    assert_eq!(info["regularity"], json!("peaked"));
    assert!((info["singular_line"].as_f64().unwrap() - 1.0 / 7.0).abs() < 1e-15);
}

#[test]
fn missing_orbit_is_named() {
    let tmp = TempDir::new().unwrap();
    // every turning point lies beyond the search window
    let out = mase(&["tw", "--c", "1.2", "--a", "0", "--e", "1e6", "--out", "none"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error kind=nonexistence: no traveling wave:"), "{err}");
    assert!(!tmp.path().join("none/manifest.json").exists());

    let out = mase(&["tw", "--c", "0.5", "--out", "none"], tmp.path());
    assert!(String::from_utf8(out.stderr).unwrap().contains("not a saddle"));
}

fn sweep_spec() -> Value {
    json!({
        "command": "simulate",
        "template": small_gaussian(),
        "parameter": "initial.amplitude",
        "values": [0.05, 0.1, 0.15, 0.2, 0.25]
    })
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let tmp = TempDir::new().unwrap();
    let path = write_json(tmp.path(), "sweep.json", &sweep_spec());
    let p = path.to_str().unwrap();
    ok(&mase(&["sweep", "--config", p, "--out", "w1", "--workers", "1"], tmp.path()));
    ok(&mase(&["sweep", "--config", p, "--out", "w4", "--workers", "4"], tmp.path()));
    let (a, b) = (tree(&tmp.path().join("w1")), tree(&tmp.path().join("w4")));
    assert_eq!(a.len(), b.len());
    assert!(a == b, "sweep outputs differ between worker counts");
    let table = fs::read_to_string(tmp.path().join("w1/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
    verify_manifest(&tmp.path().join("w1")).unwrap();
    verify_manifest(&tmp.path().join("w1/point_0003")).unwrap();
}

#[test]
fn single_point_sweep_equals_simulate() {
    let tmp = TempDir::new().unwrap();
    let mut spec = sweep_spec();
    spec["values"] = json!([0.1]);
    let sweep = write_json(tmp.path(), "sweep.json", &spec);
    let single = write_json(tmp.path(), "single.json", &small_gaussian());
    ok(&mase(&["sweep", "--config", sweep.to_str().unwrap(), "--out", "s"], tmp.path()));
    ok(&mase(&["simulate", "--config", single.to_str().unwrap(), "--out", "r"], tmp.path()));
    assert!(tree(&tmp.path().join("s/point_0000")) == tree(&tmp.path().join("r")));
}

#[test]
fn sweep_records_failures_and_continues() {
    let tmp = TempDir::new().unwrap();
    let spec = json!({
        "command": "tw",
        "template": {"c": 1.2, "n_points": 256},
        "parameter": "c",
        "values": [1.2, 0.5, 1.5]
    });
    let path = write_json(tmp.path(), "tw_sweep.json", &spec);
    ok(&mase(&["sweep", "--config", path.to_str().unwrap(), "--out", "s", "--workers", "2"], tmp.path()));
    let table = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let status: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(status, ["smooth_solitary", "error:nonexistence", "smooth_solitary"]);
    let manifest = verify_manifest(&tmp.path().join("s")).unwrap();
    assert_eq!(manifest.notes.len(), 1);
    assert!(manifest.notes[0].starts_with("point_0001: error kind=nonexistence"));
}
