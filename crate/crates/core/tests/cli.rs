use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dirac_cavity::io::{read_table, RunManifest};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-cavity")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let k = text.lines().next().unwrap().split(',').position(|c| c == name).unwrap();
    csv_rows(path).iter().map(|r| r[k].parse().unwrap()).collect()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_writes_to_stdout_by_default() {
    let out = run(&["spectrum", "--mass", "0", "--length", "1", "--count", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("I,P,Omega,Delta,residual"));
    let ps: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let pi = std::f64::consts::PI;
    assert_eq!(ps.len(), 3);
    for (p, want) in ps.iter().zip([0.5 * pi, 1.5 * pi, 2.5 * pi]) {
        assert!((p - want).abs() < 1e-14);
    }
}

#[test]
fn spectrum_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = run(&["spectrum", "--mass", "1", "--length", "1", "--count", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let p = column(&path, "P")[0];
    assert!((p - 2.028757838).abs() < 1e-9, "{p}");
}

#[test]
fn usage_and_validation_errors_exit_with_one() {
    assert_eq!(code(&run(&["spectrum", "--mass", "-1", "--length", "1", "--count", "3"])), 1);
    assert_eq!(code(&run(&["spectrum", "--length", "1", "--count", "3"])), 1);
    assert_eq!(code(&run(&["figure", "6", "--out-dir", "/tmp"])), 1);
    assert_eq!(code(&run(&["diagnose", "--check", "nonsense"])), 1);
    assert_eq!(code(&run(&["diagnose", "--check", "conditions", "--split-fraction", "1.5"])), 1);
    let help = run(&["figure", "--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("Figure defaults"));
}

#[test]
fn config_file_is_layered_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"n_local": 6, "n_global": 50, "mass_times_R": 0.25}"#).unwrap();
    let report = dir.path().join("r.json");
    let out = run(&[
        "diagnose", "--check", "conditions", "--config", cfg.to_str().unwrap(), "--n-global", "60",
        "--out", report.to_str().unwrap(),
    ]);
    assert!(matches!(code(&out), 0 | 2));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["check"], "conditions");
    assert_eq!(r["config"]["n_global"], 60);
    assert_eq!(r["config"]["n_local"], 6);
    assert_eq!(r["config"]["mass_times_R"], 0.25);
    assert_eq!(r["config"]["split_fraction"], 0.3);

    fs::write(&cfg, r#"{"mass": 1}"#).unwrap();
    assert_eq!(code(&run(&["diagnose", "--check", "conditions", "--config", cfg.to_str().unwrap()])), 1);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["diagnose", "--check", "conditions", "--config", missing.to_str().unwrap()])), 3);
}

#[test]
fn diagnose_conditions_on_defaults_passes() {
    let out = run(&["diagnose", "--check", "conditions"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], true);
    assert!(r["details"]["report"]["cond1_max_err"].as_f64().unwrap() < 1e-3);
}

#[test]
fn failed_diagnostic_exits_with_two_and_a_report() {
    let out = run(&["diagnose", "--check", "conditions", "--n-global", "15", "--n-local", "10"]);
    assert_eq!(code(&out), 2);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
}

#[test]
fn diagnose_inequivalence_and_energy() {
    let out = run(&["diagnose", "--check", "inequivalence"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["details"]["quadratic_path"]["vanishing"], true);
    assert_eq!(r["details"]["diagonal_path"]["vanishing"], false);
    assert_eq!(r["details"]["hilbert_schmidt"]["diverges"], true);

    let out = run(&["diagnose", "--check", "energy"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    for m in r["details"]["modes"].as_array().unwrap() {
        assert_eq!(m["series"]["diverges"], true);
    }

    let out = run(&["diagnose", "--check", "convergence"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn figure_one_front_follows_the_light_cone() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["figure", "1", "--out-dir", d])), 0);
    let cone = dir.path().join("fig1_light_cone.csv");
    let front = column(&cone, "light_cone");
    let edge = column(&cone, "support_edge");
    assert_eq!(front.len(), 6);
    for (f, e) in front.iter().zip(&edge) {
        assert!((f - e).abs() <= 2.0 / 800.0, "front {f} edge {e}");
    }
    let leak = column(&cone, "leakage");
    let res = column(&cone, "parseval_residual");
    assert!(leak.iter().zip(&res).all(|(l, r)| *l <= 10.0 * r));
    assert_eq!(csv_rows(&dir.path().join("fig1_density.csv")).len(), 2 * 3 * 801);
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(dir.path().join("fig1_manifest.json")).unwrap()).unwrap();
    assert_eq!(m.files.len(), 2);
    m.verify(dir.path()).unwrap();
}

#[test]
fn figure_two_errors_decrease() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["figure", "2", "--out-dir", dir.path().to_str().unwrap()])), 0);
    let err = column(&dir.path().join("fig2_errors.csv"), "l2_error");
    assert_eq!(err.len(), 3);
    assert!(err[0] > err[1] && err[1] > err[2]);
    let (cols, rows) = read_table(&dir.path().join("fig2_profile.csv")).unwrap();
    assert_eq!(cols.len(), 9);
    assert_eq!(rows.len(), 801);
}

#[test]
fn figures_three_and_four_share_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let common = ["--out-dir", dir.path().to_str().unwrap(), "--n-local", "3", "--n-global", "200", "--cache-dir", cache.to_str().unwrap()];
    assert_eq!(code(&run(&[&["figure", "3"], &common[..]].concat())), 0);
    assert_eq!(code(&run(&[&["figure", "4"], &common[..]].concat())), 0);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);

    let a = csv_rows(&dir.path().join("fig3a_spectra.csv"));
    let b = csv_rows(&dir.path().join("fig3b_spectra.csv"));
    assert_eq!(a.len(), 2 * 3);
    assert_eq!(b.len(), 3 * 3);
    // the smallest split needs far more global modes than the configured 200
    assert_eq!(b[0][3], "240000");
    let t = csv_rows(&dir.path().join("fig4_temperature.csv"));
    assert_eq!(t.len(), a.len() + b.len());
    for (row, src) in t.iter().zip(a.iter().chain(&b)) {
        assert_eq!(&row[..7], &src[..]);
    }
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(dir.path().join("fig3_manifest.json")).unwrap()).unwrap();
    assert_eq!(m.files.iter().map(|f| f.path.as_str()).collect::<Vec<_>>(), ["fig3a_spectra.csv", "fig3b_spectra.csv"]);
}

#[test]
fn figure_five_is_bounded_and_reproducible() {
    let one = tempfile::tempdir().unwrap();
    let two = tempfile::tempdir().unwrap();
    for d in [&one, &two] {
        assert_eq!(code(&run(&["figure", "5", "--out-dir", d.path().to_str().unwrap(), "--n-global", "300"])), 0);
    }
    let a = fs::read(one.path().join("fig5_correlations.csv")).unwrap();
    let b = fs::read(two.path().join("fig5_correlations.csv")).unwrap();
    assert_eq!(a, b);
    let abs = column(&one.path().join("fig5_correlations.csv"), "abs_corr");
    assert_eq!(abs.len(), 4 * 100);
    assert!(abs.iter().all(|v| *v <= 1.0));
}
