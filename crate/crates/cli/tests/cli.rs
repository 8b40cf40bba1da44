use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn multieq(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multieq"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MULTIEQ_SEED")
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    format!(
        "{}/../../fixtures/example1_n6.csv",
        env!("CARGO_MANIFEST_DIR")
    )
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_reports_threshold() {
    let dir = TempDir::new().unwrap();
    let o = multieq(&["analyze", "--input", &fixture()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&dir.path().join("summary.json"));
    let pi2 = summary["spectral"]["pi2"].as_f64().unwrap();
    assert!((pi2 - 1.216).abs() < 1.5e-3);
    assert_eq!(summary["spectral"]["lambda2nd_simple"], Value::Bool(true));
    for panel in ["a", "b", "c", "d"] {
        assert!(dir.path().join(format!("fig2_disks_{panel}.csv")).exists());
    }
    let validation = json(&dir.path().join("validation.json"));
    assert!(validation["symmetrizer_residual"].as_f64().unwrap() < 1e-3);
    assert!(stdout(&o).contains("pi2"));
}

#[test]
fn negative_entry_is_a_model_violation() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("neg.csv");
    fs::write(&input, "0,1,0\n1,0,-0.5\n0,1,0\n").unwrap();
    let out = dir.path().join("out");
    let o = multieq(&["analyze", "--input", input.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = json(&out.join("error.json"));
    assert_eq!(err["error"], "NegativeEntry");
    assert_eq!(err["row"], 1);
    assert_eq!(err["col"], 2);
}

#[test]
fn asymmetric_pattern_is_a_model_violation() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("dir.csv");
    fs::write(&input, "0,1,1\n1,0,1\n0,1,0\n").unwrap();
    let o = multieq(&["analyze", "--input", input.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        json(&dir.path().join("error.json"))["error"],
        "NotSymmetrizable"
    );
}

#[test]
fn malformed_or_missing_input_is_io_failure() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "0,1\n1,zero\n").unwrap();
    let o = multieq(&["analyze", "--input", input.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = multieq(
        &["analyze", "--input", "/nonexistent/matrix.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn census_at_example_effort() {
    let dir = TempDir::new().unwrap();
    let o = multieq(
        &[
            "equilibria",
            "--pi",
            "1.838",
            "--starts",
            "1000",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let census = json(&dir.path().join("census_pi_1.838.json"));
    let records = census["records"].as_array().unwrap();
    assert!(records.len() >= 7);
    let in_k = records.iter().filter(|r| r["orthant"] == "--+-++").count();
    assert!(in_k >= 3);
    assert!(records.iter().any(|r| r["orthant"] == "++-+--"));
    let csv = fs::read_to_string(dir.path().join("census_pi_1.838.csv")).unwrap();
    assert_eq!(csv.lines().count(), records.len() + 1);
    assert!(stdout(&o).contains("--+-++"));
}

#[test]
fn census_below_one_is_origin() {
    let dir = TempDir::new().unwrap();
    let o = multieq(
        &["equilibria", "--pi", "0.5", "--starts", "200"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("summary.json"))["equilibria"], 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "equilibria",
        "--pi",
        "1.5",
        "--starts",
        "300",
        "--seed",
        "11",
    ];
    assert!(multieq(&args, &a).status.success());
    assert!(multieq(&[&args[..], &["--threads", "2"]].concat(), &b)
        .status
        .success());
    for name in ["census_pi_1.5.json", "census_pi_1.5.csv", "summary.json"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_reproduces_run() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = multieq(
        &[
            "sweep",
            "--pi-grid",
            "1:2:3",
            "--starts",
            "150",
            "--seed",
            "5",
        ],
        &a,
    );
    assert!(o.status.success());
    let config = json(&a.join("config.json"));
    assert_eq!(config["common"]["seed"], 5);
    assert_eq!(config["common"]["psi"], "boltzmann");
    assert!(config["common"]["tol_symmetrizer"].as_f64().unwrap() > 0.0);
    let o = multieq(&["--config", a.join("config.json").to_str().unwrap()], &b);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "summary.json",
        "fig3a_counts.csv",
        "fig1b_eigs.csv",
        "census_pi_2.csv",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_multieq"))
        .args(["equilibria", "--pi", "1.2", "--starts", "50", "--out"])
        .arg(dir.path())
        .env("MULTIEQ_SEED", "31")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(&dir.path().join("config.json"))["common"]["seed"], 31);
}

#[test]
fn simulate_matches_four_attractors() {
    let dir = TempDir::new().unwrap();
    let o = multieq(
        &[
            "simulate",
            "--pi",
            "1.838",
            "--starts",
            "40",
            "--trajectories",
            "2",
            "--t-max",
            "200",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let outcomes = json(&dir.path().join("ensemble.json"));
    let census = json(&dir.path().join("census_pi_1.838.json"));
    let records = census["records"].as_array().unwrap();
    for o in outcomes.as_array().unwrap() {
        if let Some(k) = o["attractor"].as_u64() {
            assert_eq!(records[k as usize]["stability"], "stable");
        }
    }
    assert!(dir.path().join("trajectories/traj_1.csv").exists());
    assert!(dir.path().join("attractors.csv").exists());
}

#[test]
fn example2_writes_figure_data() {
    let dir = TempDir::new().unwrap();
    let o = multieq(
        &[
            "example2",
            "--n",
            "8",
            "--p",
            "0.4",
            "--pi-grid",
            "1:6:4",
            "--starts",
            "150",
            "--seed",
            "42",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "fig3a_counts.csv",
        "fig3b_ratios.csv",
        "fig3c_polar.csv",
        "summary.json",
        "config.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let ratios = fs::read_to_string(dir.path().join("fig3b_ratios.csv")).unwrap();
    for line in ratios.lines().skip(1) {
        let r: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r <= 1.0 + 1e-8);
    }
}

#[test]
fn rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        multieq(
            &["equilibria", "--pi", "1.2", "--tol-newton=-1"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        multieq(&["sweep", "--pi-grid", "3:1:4"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        multieq(&["analyze", "--psi", "logistic"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(multieq(&[], dir.path()).status.code(), Some(2));
}
