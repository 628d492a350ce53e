use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bonnet"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn families_lists_six_rows_with_kappa() {
    let o = run(&["families", "--json", "--a", "2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let kappas: Vec<f64> = rows.iter().map(|r| r["kappa"].as_f64().unwrap()).collect();
    assert_eq!(kappas, vec![0.0, 0.0, -4.0, -4.0, 4.0, 4.0]);

    let o = run(&["families"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 7);
}

#[test]
fn solve_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("demo.json");
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["profile.csv", "psi.csv", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let psi = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert_eq!(psi.lines().count(), 1 + 64 * 64);
    let row = psi.lines().nth(2).unwrap();
    // 17 significant digits
    let mantissa = row.split(',').nth(2).unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17);
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["psi"]["source"], "closed_form");
    assert!(r["checks"]["gauss_s"]["max_residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn refine_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "solve",
        "--refine",
        "3",
        "--json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = v["lax_s"]["observed_order"].as_f64().unwrap();
    assert!(p >= 1.9, "{p}");
    assert!(v["lax_analytic"]["observed_order"].is_null());
}

#[test]
fn domain_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("crosses_zero.json");
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "input");

    let o = run(&["verify", "--config", "/nonexistent/config.json"]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify", "--refine", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn mesh_outputs_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["mesh", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let obj_a = std::fs::read(a.path().join("surface.obj")).unwrap();
    let obj_b = std::fs::read(b.path().join("surface.obj")).unwrap();
    assert_eq!(obj_a, obj_b);
    let text = String::from_utf8(obj_a).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4096);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2 * 63 * 63);
    let s = read_json(&a.path().join("structure.json"));
    assert_eq!(s["structure"].as_object().unwrap().len(), 5);
    assert!(a.path().join("forms.csv").exists());
}

#[test]
fn deform_sweep_and_missing_t0() {
    let o = run(&["deform"]);
    assert_eq!(code(&o), 2);

    let mut ii = Vec::new();
    let mut hdev = Vec::new();
    for t0 in ["0.5", "1", "2"] {
        let d = tempfile::tempdir().unwrap();
        let o = run(&["deform", "--t0", t0, "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let r = read_json(&d.path().join("deform.json"));
        let tol = r["checks"]["deform_mean_curvature"]["tolerance"].as_f64().unwrap();
        let h = r["H_deviation"].as_f64().unwrap();
        let i = r["II_deviation"].as_f64().unwrap();
        assert!(h < tol && i > 10.0 * tol, "t0 {t0}: H {h} II {i} tol {tol}");
        assert!(d.path().join("deformed.obj").exists());
        ii.push(i);
        hdev.push(h);
    }
    assert!((ii[0] - ii[1]).abs() > 1e-3 && (ii[1] - ii[2]).abs() > 1e-3 && (ii[0] - ii[2]).abs() > 1e-3);
    let (lo, hi) = hdev.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo < 10.0, "{hdev:?}");
}

#[test]
fn verify_demo_passes_and_tightened_fails() {
    let o = run(&["verify", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.as_object().unwrap().len() >= 15);
    for (k, c) in v.as_object().unwrap() {
        for key in ["max_residual", "grid_h", "observed_order"] {
            assert!(c.get(key).is_some(), "{k} lacks {key}");
        }
    }

    let o = run(&["verify", "--tol-scale", "1e-6"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("checks failed"));
}

#[test]
fn verify_only_filters() {
    let o = run(&["verify", "--only", "gauss", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert!(!keys.is_empty());
    assert!(keys.iter().all(|k| k.contains("gauss")));
}

#[test]
fn verify_reports_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("rational_integrated.json");
    for d in [&a, &b] {
        let o = run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        std::fs::read(a.path().join("verify.json")).unwrap(),
        std::fs::read(b.path().join("verify.json")).unwrap()
    );
}
