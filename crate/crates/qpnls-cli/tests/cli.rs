//! End-to-end tests of the command-line surface: artifact formats, exit
//! codes, provenance hashes, and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpnls"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn qpnls");
    assert!(
        out.status.success(),
        "qpnls {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_expect_code(args: &[&str], code: i32) -> Output {
    let out = bin().args(args).output().expect("spawn qpnls");
    assert_eq!(
        out.status.code(),
        Some(code),
        "qpnls {:?}\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Constant-mode config: a single zero mode, in-regime horizon.
fn constant_mode_config(epsilon: f64, t_end: f64, nodes: usize) -> String {
    format!(
        r#"{{
  "basis": {{"omega": [1.0], "omega_prime": [1.0]}},
  "box": {{"rx": 0, "ry": 0}},
  "profile": {{"kind": "exponential", "kappa1": 1.0, "kappa2": 1.0}},
  "epsilon": {epsilon},
  "grid": {{"t_end": {t_end}, "nodes": {nodes}}},
  "k_max": 8,
  "tol": 1e-13,
  "seed": 0,
  "rho1": 0.1,
  "rho2": 0.1
}}"#
    )
}

/// Radius-1 box in nu = (2, 2) with seed-0 exponential data.
fn coupled_config(epsilon: f64) -> String {
    format!(
        r#"{{
  "basis": {{"omega": [1.0, 1.4142135623730951], "omega_prime": [1.0, 1.7320508075688772]}},
  "box": {{"rx": 1, "ry": 1}},
  "profile": {{"kind": "exponential", "kappa1": 1.0, "kappa2": 1.0}},
  "epsilon": {epsilon},
  "grid": {{"t_eps_fraction": 1.0, "nodes": 8}},
  "k_max": 4,
  "tol": 0.0,
  "seed": 0,
  "rho1": 0.1,
  "rho2": 0.1
}}"#
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn constant_mode_run_writes_artifacts_matching_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &constant_mode_config(0.1, 0.04, 8));
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);

    let manifest = read_json(&out_dir.join("manifest.json"));
    let hash = manifest["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 16);
    assert_eq!(manifest["mode_count"], 1);
    assert_eq!(manifest["in_regime"], true);
    // nu = (1, 1) is the labeled periodic degenerate case
    assert_eq!(manifest["periodic_degenerate"], true);

    // every snapshot carries the hash; the last one matches e^{i eps t}
    let snaps = manifest["snapshots"].as_array().unwrap();
    assert!(snaps.len() >= 2);
    let last = read_json(&out_dir.join(snaps.last().unwrap().as_str().unwrap()));
    assert_eq!(last["config_hash"].as_str().unwrap(), hash);
    let values = last["values"].as_array().unwrap();
    assert_eq!(values.len(), 9);
    for (node, row) in values.iter().enumerate() {
        let t = 0.04 * node as f64 / 8.0;
        let (re, im) = (row[0][0].as_f64().unwrap(), row[0][1].as_f64().unwrap());
        let (wre, wim) = ((0.1 * t).cos(), (0.1 * t).sin());
        let err = ((re - wre).powi(2) + (im - wim).powi(2)).sqrt();
        assert!(err < 1e-6, "node {node}: err {err}");
    }

    // diffs.csv: hash comment, header, one row per completed step
    let diffs = std::fs::read_to_string(out_dir.join("diffs.csv")).unwrap();
    let mut lines = diffs.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_hash={hash}"));
    assert_eq!(lines.next().unwrap(), "k,sup_diff");
    assert_eq!(lines.count(), snaps.len() - 1);
}

#[test]
fn zero_epsilon_run_has_one_zero_diff_row_and_verifies_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &constant_mode_config(0.0, 1.0, 4));
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let diffs = std::fs::read_to_string(out_dir.join("diffs.csv")).unwrap();
    let rows: Vec<&str> = diffs.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0], "1,0.0000000000000000e0");
    // the free flow is always in regime and trivially satisfies every bound
    run_ok(&["verify", "--run-dir", out_dir.to_str().unwrap()]);
}

#[test]
fn polynomial_profile_runs_but_skips_the_exponential_bound_family() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
  "basis": {"omega": [1.0, 1.4142135623730951], "omega_prime": [1.0, 1.7320508075688772]},
  "box": {"rx": 1, "ry": 1},
  "profile": {"kind": "polynomial", "r1": 3.0, "r2": 3.0},
  "epsilon": 0.01,
  "grid": {"t_end": 0.01, "nodes": 4},
  "k_max": 2,
  "tol": 0.0,
  "seed": 0,
  "rho1": 0.1,
  "rho2": 0.1
}"#;
    let cfg = write_config(tmp.path(), "p.json", body);
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert!(manifest["t_eps"].is_null());
    assert_eq!(manifest["in_regime"], false);
    let out = run_ok(&["verify", "--run-dir", out_dir.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("polynomial"));
    let reports = std::fs::read_to_string(out_dir.join("reports.jsonl")).unwrap();
    assert!(reports.is_empty());
}

#[test]
fn t_eps_fraction_resolves_against_the_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
  "basis": {"omega": [1.0, 1.4142135623730951], "omega_prime": [1.0, 1.7320508075688772]},
  "box": {"rx": 1, "ry": 1},
  "profile": {"kind": "exponential", "kappa1": 1.0, "kappa2": 1.0},
  "epsilon": 0.01,
  "grid": {"t_eps_fraction": 1.0, "nodes": 4},
  "k_max": 2,
  "tol": 0.0,
  "seed": 0,
  "rho1": 0.1,
  "rho2": 0.1
}"#;
    let cfg = write_config(tmp.path(), "c.json", body);
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let manifest = read_json(&out_dir.join("manifest.json"));
    let te = manifest["t_eps"].as_f64().unwrap();
    assert!((te - 0.011431).abs() < 1e-6, "t_eps = {te}");
    assert!((manifest["t_end"].as_f64().unwrap() - te).abs() < 1e-15);
    assert_eq!(manifest["in_regime"], true);
}

#[test]
fn verify_passes_then_fails_on_a_planted_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &coupled_config(0.01));
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    run_ok(&[
        "verify",
        "--run-dir",
        out_dir.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);

    let reports = std::fs::read_to_string(out_dir.join("reports.jsonl")).unwrap();
    assert!(reports.lines().count() >= 5);
    for line in reports.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        assert_eq!(r["pass"], true, "{line}");
        assert_eq!(r["in_regime"], true);
    }

    // plant a 2x violation of the decay bound at the zero mode (A = 1944)
    let manifest = read_json(&out_dir.join("manifest.json"));
    let last_name = manifest["snapshots"]
        .as_array()
        .unwrap()
        .last()
        .unwrap()
        .as_str()
        .unwrap()
        .to_string();
    let snap_path = out_dir.join(&last_name);
    let mut snap = read_json(&snap_path);
    snap["values"][1][0] = serde_json::json!([3888.0, 0.0]);
    std::fs::write(&snap_path, serde_json::to_string(&snap).unwrap()).unwrap();

    let out = run_expect_code(&["verify", "--run-dir", out_dir.to_str().unwrap()], 4);
    let reports = std::fs::read_to_string(out_dir.join("reports.jsonl")).unwrap();
    let decay: Value = reports
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|r| r["bound_name"] == "uniform_decay")
        .unwrap();
    assert_eq!(decay["pass"], false);
    let ratio = decay["worst_ratio"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 1e-6, "worst_ratio = {ratio}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("uniform_decay"));
}

#[test]
fn verify_rejects_a_mismatched_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &coupled_config(0.01));
    let other = write_config(tmp.path(), "other.json", &coupled_config(0.02));
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    run_expect_code(
        &[
            "verify",
            "--run-dir",
            out_dir.to_str().unwrap(),
            "--config",
            other.to_str().unwrap(),
        ],
        2,
    );
}

#[test]
fn verify_missing_artifacts_exits_five() {
    let tmp = tempfile::tempdir().unwrap();
    run_expect_code(
        &[
            "verify",
            "--run-dir",
            tmp.path().join("nope").to_str().unwrap(),
        ],
        5,
    );
}

#[test]
fn invalid_config_reports_every_failure_together() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
  "basis": {"omega": [1.0], "omega_prime": [1.0]},
  "box": {"rx": 0, "ry": 0},
  "profile": {"kind": "exponential", "kappa1": 2.5, "kappa2": 1.0},
  "epsilon": -1.0,
  "grid": {"t_end": 1.0, "nodes": 7},
  "k_max": 0,
  "tol": 1e-10,
  "seed": 0,
  "rho1": 0.1,
  "rho2": 0.1
}"#;
    let cfg = write_config(tmp.path(), "bad.json", body);
    let out = run_expect_code(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
        ],
        2,
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("profile"), "{err}");
    assert!(err.contains("epsilon"), "{err}");
    assert!(err.contains("num_nodes") || err.contains("grid"), "{err}");
    assert!(err.contains("k_max"), "{err}");
}

#[test]
fn divergent_run_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &constant_mode_config(400.0, 1.0, 8));
    run_expect_code(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            tmp.path().join("o").to_str().unwrap(),
            "--override-te",
        ],
        3,
    );
}

#[test]
fn tree_tables_match_the_known_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t1.csv");
    run_ok(&[
        "tree",
        "--k",
        "1",
        "--ell-cap",
        "4",
        "--x",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert!(rows[0].starts_with("0,1,"));
    assert!(rows[1].starts_with("1,1,"));
    assert!(rows[2].starts_with("2,0,"));

    // k = 3: 730 branches in total
    let out3 = tmp.path().join("t3.csv");
    let o = run_ok(&[
        "tree",
        "--k",
        "3",
        "--ell-cap",
        "13",
        "--x",
        "0.1",
        "--out",
        out3.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("branches=730"));

    // capped majorant at x = 4/27 approaches the closed form from below 3/2
    let outm = tmp.path().join("tm.csv");
    run_ok(&[
        "tree",
        "--k",
        "16",
        "--ell-cap",
        "12",
        "--x",
        "0.14814814814814814",
        "--out",
        outm.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&outm).unwrap();
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let partial: f64 = fields[3].parse().unwrap();
    assert!((partial - 1.19208).abs() < 1e-3, "partial = {partial}");
    assert!(partial <= 1.5);
}

#[test]
fn sweep_fits_a_unit_slope_and_flags_out_of_regime_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &constant_mode_config(0.1, 0.04, 8));
    let out_dir = tmp.path().join("sweep");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--epsilons",
        "1e-1,1e-2,1e-3",
        "--eta",
        "0.1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let summary = read_json(&out_dir.join("sweep_summary.json"));
    let slope = summary["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.02, "slope = {slope}");
    assert!(summary["deviation_over_eps_t_spread"].as_f64().unwrap() < 0.1);
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 6);
    assert!(csv.lines().skip(2).all(|l| l.ends_with("true")));

    // an oversized horizon coefficient pushes eps*t past the te scale
    let out2 = tmp.path().join("sweep2");
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--epsilons",
        "1e-1,1e-2,1e-3",
        "--eta",
        "0.1",
        "--t-coeff",
        "0.02",
        "--out",
        out2.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(out2.join("sweep.csv")).unwrap();
    // the three horizon rows all exceed T_eps; the fixed-t rows drop back
    // inside it for the smaller epsilons
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert!(rows[..3].iter().all(|l| l.ends_with("false")), "{rows:?}");
    assert!(rows[3..].iter().any(|l| l.ends_with("true")), "{rows:?}");

    // fewer than three epsilons cannot support a fit
    run_expect_code(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--epsilons",
            "1e-1,1e-2",
            "--eta",
            "0.1",
            "--out",
            tmp.path().join("s3").to_str().unwrap(),
        ],
        2,
    );
}

#[test]
fn polynomial_sweep_needs_an_explicit_horizon_coefficient() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
  "basis": {"omega": [1.0], "omega_prime": [1.0]},
  "box": {"rx": 1, "ry": 1},
  "profile": {"kind": "polynomial", "r1": 2.0, "r2": 2.0},
  "epsilon": 0.1,
  "grid": {"t_end": 0.01, "nodes": 8},
  "k_max": 6,
  "tol": 1e-12,
  "seed": 0,
  "rho1": 0.1,
  "rho2": 0.1
}"#;
    let cfg = write_config(tmp.path(), "p.json", body);
    let out_dir = tmp.path().join("sweep");
    run_expect_code(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--epsilons",
            "1e-1,1e-2,1e-3",
            "--eta",
            "0.1",
            "--out",
            out_dir.to_str().unwrap(),
        ],
        2,
    );
    run_ok(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--epsilons",
        "1e-1,1e-2,1e-3",
        "--eta",
        "0.1",
        "--t-coeff",
        "0.001",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let summary = read_json(&out_dir.join("sweep_summary.json"));
    let slope = summary["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "slope = {slope}");
    // no te scale exists for this profile, so every row is out of regime
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(csv.lines().skip(2).all(|l| l.ends_with("false")));
}

#[test]
fn oracle_agrees_with_the_closed_form_and_the_linear_flow() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &constant_mode_config(0.1, 0.04, 8));
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    run_ok(&[
        "oracle",
        "--run-dir",
        out_dir.to_str().unwrap(),
        "--substeps",
        "16",
    ]);
    let summary = read_json(&out_dir.join("oracle_summary.json"));
    assert!(summary["sup_diff"].as_f64().unwrap() < 1e-6);
    assert!(summary["mass_drift"].as_f64().unwrap() < 1e-10);
    assert_eq!(summary["steps"], 8 * 16);

    let cfg0 = write_config(tmp.path(), "c0.json", &constant_mode_config(0.0, 0.04, 8));
    let dir0 = tmp.path().join("run0");
    run_ok(&[
        "run",
        "--config",
        cfg0.to_str().unwrap(),
        "--out",
        dir0.to_str().unwrap(),
    ]);
    run_ok(&["oracle", "--run-dir", dir0.to_str().unwrap()]);
    let summary = read_json(&dir0.join("oracle_summary.json"));
    assert!(summary["sup_diff"].as_f64().unwrap() < 1e-10);
}

#[test]
fn synth_of_the_initial_node_is_constant_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &constant_mode_config(0.1, 0.04, 8));
    let out_dir = tmp.path().join("run");
    run_ok(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    run_ok(&[
        "synth",
        "--run-dir",
        out_dir.to_str().unwrap(),
        "--node",
        "0",
        "--nx",
        "3",
        "--ny",
        "3",
    ]);
    let csv = std::fs::read_to_string(out_dir.join("synth.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[2] - 1.0).abs() < 1e-12 && f[3].abs() < 1e-12, "{line}");
        assert!((f[5] - 1.0).abs() < 1e-12 && f[6].abs() < 1e-12, "{line}");
    }
}

#[test]
fn artifacts_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &coupled_config(0.01));
    let d1 = tmp.path().join("a");
    let d2 = tmp.path().join("b");
    run_ok(&[
        "--threads",
        "1",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d1.to_str().unwrap(),
    ]);
    run_ok(&[
        "--threads",
        "2",
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        d2.to_str().unwrap(),
    ]);
    for name in [
        "manifest.json",
        "diffs.csv",
        "c_0.json",
        "c_1.json",
        "c_4.json",
    ] {
        let a = std::fs::read(d1.join(name)).unwrap();
        let b = std::fs::read(d2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between thread counts");
    }
}
