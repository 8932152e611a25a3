//! End-to-end checks of the `vring` binary: exit codes, file outputs, the
//! manifest round-trip, and the kernel probe's printed table.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vring"))
        .args(args)
        .output()
        .expect("spawn vring")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn empty_ring_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "rings": [], "integrator": { "dt": 0.01, "t_end": 0.1 } }"#,
    );
    let out = vring(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    let err: serde_json::Value = serde_json::from_str(stderr_of(&out).trim()).unwrap();
    assert_eq!(err["error"], "config-parse");
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{ not json");
    let out = vring(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(stderr_of(&out).trim()).unwrap();
    assert_eq!(err["error"], "config-parse");
}

#[test]
fn zero_horizon_emits_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "rings": [{ "center": [0.0, 1.0], "epsilon": 0.1, "intensity": 1.0,
                        "profile": "uniform", "particle_count": 50 }],
            "integrator": { "dt": 0.01, "t_end": 0.0 }
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = vring(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let csv = fs::read_to_string(out_dir.join("ring_0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus exactly one snapshot");
    assert_eq!(csv_column(&csv, "t"), vec![0.0]);
}

#[test]
fn preset_run_reports_monotone_time_and_constant_mass() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vring(&[
        "simulate",
        "--preset",
        "single-ring-eps0.1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = fs::read_to_string(out_dir.join("ring_0.csv")).unwrap();
    assert!(csv.starts_with("t,z_B,r_B,I,m_R,mu_Rh,R_t,M0,M2,E,qz,qr\n"));
    let t = csv_column(&csv, "t");
    assert!(t.len() > 2);
    assert!(t.windows(2).all(|w| w[1] > w[0]), "time not monotone: {t:?}");
    let m0 = csv_column(&csv, "M0");
    assert!(
        m0.iter().all(|&m| m == m0[0]),
        "M0 drifted across snapshots: {m0:?}"
    );
    // The ring moves forward along the axis.
    let z = csv_column(&csv, "z_B");
    assert!(z.last().unwrap() > z.first().unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "completed");
    assert_eq!(manifest["resolved"]["particles_per_ring"][0], 600);
}

#[test]
fn manifest_round_trip_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = vring(&[
        "simulate",
        "--preset",
        "single-ring-eps0.1",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let second = dir.path().join("second");
    let manifest_path = first.join("manifest.json");
    let out = vring(&[
        "simulate",
        "--config",
        manifest_path.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let a = fs::read(first.join("ring_0.csv")).unwrap();
    let b = fs::read(second.join("ring_0.csv")).unwrap();
    assert_eq!(a, b, "re-running from the manifest must reproduce the CSV bytes");
    let ma = fs::read(first.join("manifest.json")).unwrap();
    let mb = fs::read(second.join("manifest.json")).unwrap();
    assert_eq!(ma, mb);
}

#[test]
fn particle_snapshots_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "rings": [{ "center": [0.0, 1.0], "epsilon": 0.1, "intensity": 1.0,
                        "profile": "radial-cosine", "particle_count": 40 }],
            "integrator": { "dt": 0.01, "t_end": 0.02 },
            "particle_snapshots": true
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = vring(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    for k in 0..3 {
        let text = fs::read_to_string(out_dir.join(format!("particles_{k:04}.csv"))).unwrap();
        assert!(text.starts_with("ring,id,z,r,weight,omega\n"));
        assert_eq!(text.lines().count(), 1 + 40);
    }
}

#[test]
fn study_command_writes_table_summary_and_per_run_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "rings": [{ "center": [0.0, 1.0], "epsilon": 0.1, "intensity": 1.0,
                        "profile": "uniform", "particle_count": 60 }],
            "integrator": { "dt": 0.02, "t_end": 0.1 },
            "diagnostics": { "energy_every": 0 },
            "study": { "epsilons": [0.3, 0.2, 0.15] }
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = vring(&["study", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let table = fs::read_to_string(out_dir.join("study.csv")).unwrap();
    assert!(table.starts_with("eps,abs_log_eps,v_hat,v_err,max_r_dev,sup_I_logsq,status\n"));
    assert_eq!(table.lines().count(), 4);
    assert!(table.lines().skip(1).all(|l| l.ends_with(",ok")));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("study_summary.json")).unwrap())
            .unwrap();
    assert!(summary["fit"]["intercept"].is_number());
    assert_eq!(summary["rows"].as_array().unwrap().len(), 3);

    for index in 0..3 {
        let per_run = out_dir.join(format!("eps_{index}")).join("ring_0.csv");
        assert!(per_run.exists(), "missing {per_run:?}");
    }
    // The printed report carries the fit as well.
    let text = stdout_of(&out);
    assert!(text.contains("fit_intercept,"));
}

#[test]
fn limit_command_reports_corotation_period() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vring(&[
        "limit",
        "--preset",
        "two-vortex-corotation",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = fs::read_to_string(out_dir.join("limit.csv")).unwrap();
    assert!(csv.starts_with("t,i,z1,z2\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("limit_summary.json")).unwrap())
            .unwrap();
    let period = summary["corotation_period"].as_f64().unwrap();
    assert!(
        (period - std::f64::consts::PI).abs() < 1e-6,
        "period {period} should be π"
    );
}

#[test]
fn limit_command_single_large_ring_matches_time_column() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = vring(&[
        "limit",
        "--preset",
        "large-ring-single",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(out_dir.join("limit.csv")).unwrap();
    let t = csv_column(&csv, "t");
    let z1 = csv_column(&csv, "z1");
    for (&t, &z) in t.iter().zip(&z1) {
        assert!((z - t).abs() < 1e-12, "z1 = {z} at t = {t}");
    }
}

#[test]
fn kernel_probe_prints_decomposition_rows() {
    let out = vring(&["kernel-probe", "--x", "0,1", "--y", "0.3,1.2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "quantity,z,r");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "H");
    let h1: f64 = row[1].parse().unwrap();
    assert!((h1 - 0.43064189831666827).abs() < 1e-9);
    let residual_row = text
        .lines()
        .find(|l| l.starts_with("residual,"))
        .expect("residual row");
    for val in residual_row.split(',').skip(1) {
        let v: f64 = val.parse().unwrap();
        assert!(v.abs() < 1e-8, "residual {v}");
    }

    // Coaxial points: the radial component of H vanishes.
    let out = vring(&["kernel-probe", "--x", "0.4,1.0", "--y", "0.4,1.5"]);
    let text = stdout_of(&out);
    let h_row = text.lines().find(|l| l.starts_with("H,")).unwrap();
    let h2: f64 = h_row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(h2.abs() < 1e-12, "H2 = {h2} at x1 = y1");

    // Source on the axis: H is identically zero.
    let out = vring(&["kernel-probe", "--x", "0,1", "--y", "0.3,0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let h_row = text.lines().find(|l| l.starts_with("H,")).unwrap();
    for val in h_row.split(',').skip(1) {
        assert_eq!(val.parse::<f64>().unwrap(), 0.0);
    }

    // Out-of-domain input is rejected as a usage problem.
    let out = vring(&["kernel-probe", "--x", "0,-1", "--y", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn axis_crossing_aborts_with_numerical_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // A violently swirling core integrated with an absurdly large step: the
    // first RK4 stage already throws an inner particle across r = 0.
    let cfg = write_config(
        dir.path(),
        r#"{
            "rings": [{ "center": [0.0, 0.5], "epsilon": 0.05, "intensity": 5.0,
                        "profile": "uniform", "particle_count": 50 }],
            "integrator": { "dt": 0.5, "t_end": 5.0 },
            "diagnostics": { "energy_every": 0 }
        }"#,
    );
    let out_dir = dir.path().join("out");
    let out = vring(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    let err: serde_json::Value = serde_json::from_str(stderr_of(&out).trim()).unwrap();
    assert_eq!(err["error"], "axis-crossing");

    // The partial trajectory is still on disk, as is the manifest with the
    // failure status.
    let csv = fs::read_to_string(out_dir.join("ring_0.csv")).unwrap();
    assert!(csv.lines().count() >= 2, "at least the initial snapshot is kept");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "axis-crossing");
}
