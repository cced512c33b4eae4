use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn quadfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadfit")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// A deterministic sample in `[0, scale)`.
fn grid_sample(n: usize, scale: f64) -> String {
    (0..n).map(|i| format!("{}\n", ((i as f64 * 0.618_033_988_7).fract() * scale))).collect()
}

fn without_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"wall_time_s\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn poisson_on_circle_reports_six_dof() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "u.txt", &grid_sample(120, 2.0 * std::f64::consts::PI));
    let r = json(&quadfit(&["test", "--data", &data, "--kernel", "poisson:rho=0.5", "--null", "circle", "--seed", "7"]));
    assert!((r["dof"]["dof"].as_f64().unwrap() - 6.0).abs() < 1e-9);
    assert_eq!(r["dof"]["method"], "analytic");
    assert_eq!(r["spectrum"]["eigenvalues"].as_array().unwrap().len(), 20);
    let methods: Vec<&str> = r["p_values"].as_array().unwrap().iter().map(|p| p["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["spectral", "satterthwaite"]);
}

#[test]
fn cvm_reports_two_and_a_half_dof() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "u.txt", &format!("value\n{}", grid_sample(50, 1.0)));
    let r = json(&quadfit(&["test", "--data", &data, "--kernel", "cvm", "--null", "uniform01", "--seed", "1"]));
    assert!((r["dof"]["dof"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    assert_eq!(r["n"], 50);
    let r = json(&quadfit(&["dof", "--kernel", "cvm", "--null", "uniform01"]));
    assert!((r["dof"]["trace"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    assert!((r["dof"]["dof"].as_f64().unwrap() - 2.5).abs() < 1e-9);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "x.txt", &grid_sample(60, 1.0));
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let o = quadfit(&[
            "test", "--data", &data, "--kernel", "cvm", "--null", "uniform01", "--seed", "11", "--draws", "5000",
            "--boot", "60", "--estimator", "u", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let (a, b) = (std::fs::read_to_string(&out_a).unwrap(), std::fs::read_to_string(&out_b).unwrap());
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let r: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(r["p_values"].as_array().unwrap().len(), 3);
    assert_eq!(r["statistic"]["estimator"], "u");
    let other = quadfit(&["test", "--data", &data, "--kernel", "cvm", "--null", "uniform01", "--seed", "12", "--draws", "5000"]);
    assert_ne!(without_wall_time(&String::from_utf8(other.stdout).unwrap()), without_wall_time(&a));
}

#[test]
fn composite_normal_test_reports_fitted_parameters() {
    let dir = TempDir::new().unwrap();
    let xs: String = (1..=80).map(|i| format!("{}\n", ((i as f64 / 81.0) - 0.5) * 4.0)).collect();
    let data = write(&dir, "n.txt", &xs);
    let r = json(&quadfit(&[
        "test", "--data", &data, "--kernel", "normal:h2=1", "--model", "normal", "--seed", "3", "--draws", "5000",
    ]));
    let theta = r["theta"].as_array().unwrap();
    assert_eq!(theta.len(), 2);
    assert!(theta[0].as_f64().unwrap().abs() < 1e-12);
    let p = r["p_values"][0]["p"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn pearson_kernel_against_a_pmf_file() {
    let dir = TempDir::new().unwrap();
    let pmf = write(&dir, "g.txt", "value,prob\n0,0.2\n1,0.3\n2,0.5\n");
    let data = write(&dir, "d.txt", "0\n0\n1\n2\n2\n2\n1\n0\n2\n2\n");
    let r = json(&quadfit(&[
        "test", "--data", &data, "--kernel", "pearson", "--null", &format!("pmf:{pmf}"), "--seed", "1", "--pvalue",
        "satterthwaite",
    ]));
    // nV equals the classical Pearson statistic
    let counts = [3.0f64, 2.0, 5.0];
    let probs = [0.2f64, 0.3, 0.5];
    let x2: f64 = counts.iter().zip(probs).map(|(o, p)| (o - 10.0 * p).powi(2) / (10.0 * p)).sum();
    assert!((r["statistic"]["value"].as_f64().unwrap() - x2).abs() < 1e-12);
    assert!((r["dof"]["dof"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn spectrum_reports_mehler_constants() {
    let r = json(&quadfit(&["spectrum", "--kernel", "normal:h2=1", "--null", "normal:mu=0,sigma2=1", "--max-terms", "5"]));
    let m = &r["mehler"];
    let w = m["w"].as_f64().unwrap();
    assert!((w - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
    assert!(m["printed_a"].as_f64().unwrap() != m["a"].as_f64().unwrap());
    let eig = r["spectrum"]["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 5);
    assert!((eig[1].as_f64().unwrap() / eig[0].as_f64().unwrap() - w).abs() < 1e-12);

    let r = json(&quadfit(&["spectrum", "--kernel", "poisson:rho=0.5", "--null", "circle", "--centered", "--full-spectrum"]));
    assert!(r["spectrum"]["eigenvalues"].as_array().unwrap().len() > 20);
    assert!((r["spectrum"]["eigenvalues"][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn empirical_dof_from_data() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "x.txt", &grid_sample(40, 1.0));
    let r = json(&quadfit(&["dof", "--kernel", "normal:h2=0.1", "--data", &data]));
    assert_eq!(r["dof"]["method"], "empirical");
    assert!(r["dof"]["dof"].as_f64().unwrap() > 1.0);
    assert_eq!(r["heuristic_range"]["upper"], 8.0);
    assert!(r["cumulants"]["skewness_ratio"].as_f64().unwrap() >= 1.0 - 1e-12);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "u.txt", &grid_sample(30, 1.0));
    // identity kernel on a continuum: the limit law degenerates
    let o = quadfit(&["test", "--data", &data, "--kernel", "identity", "--null", "uniform01", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = write(&dir, "bad.txt", "0.5\nabc\n");
    let o = quadfit(&["test", "--data", &bad, "--kernel", "cvm", "--null", "uniform01", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));

    let nan = write(&dir, "nan.txt", "0.5\nNaN\n");
    let o = quadfit(&["test", "--data", &nan, "--kernel", "cvm", "--null", "uniform01", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let empty = write(&dir, "empty.txt", "");
    let o = quadfit(&["test", "--data", &empty, "--kernel", "cvm", "--null", "uniform01", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("nope.txt");
    let o = quadfit(&["test", "--data", missing.to_str().unwrap(), "--kernel", "cvm", "--null", "uniform01", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));

    // usage errors
    assert_eq!(quadfit(&["test", "--data", &data, "--kernel", "cvm", "--null", "uniform01"]).status.code(), Some(1));
    assert_eq!(quadfit(&["test", "--data", &data, "--kernel", "gauss", "--null", "uniform01", "--seed", "1"]).status.code(), Some(1));
    let both = quadfit(&["test", "--data", &data, "--kernel", "cvm", "--null", "uniform01", "--model", "normal", "--seed", "1"]);
    assert_eq!(both.status.code(), Some(1));
    assert!(Path::new(env!("CARGO_BIN_EXE_quadfit")).exists());
}
