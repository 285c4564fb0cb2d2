//! End-to-end checks of the binary: exit codes, file outputs, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sctherm")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sctherm-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn fig1_runs_and_emits_expected_columns() {
    let out = tmp_dir("fig1");
    let res = run(&[
        "fig1",
        "--out",
        out.to_str().unwrap(),
        "--grid-points",
        "64",
        "--t-max",
        "0.2",
        "--beta",
        "1.0",
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = read(&out.join("fig1.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,beta,e_u,e_u_weak,s,q,sigma,sigma_rate"
    );
    assert_eq!(csv.lines().count(), 1 + 64);
    assert!(!csv.contains('\r'), "LF line endings only");
    // Second law on the emitted rows.
    for line in csv.lines().skip(1) {
        let sigma: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!(sigma >= -1e-6);
    }
}

#[test]
fn identical_config_gives_byte_identical_csv() {
    let out_a = tmp_dir("det-a");
    let out_b = tmp_dir("det-b");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "figS3",
            "--out",
            out.to_str().unwrap(),
            "--grid-points",
            "48",
            "--t-max",
            "0.3",
        ]);
        assert!(res.status.success());
    }
    assert_eq!(
        read(&out_a.join("figS3.csv")),
        read(&out_b.join("figS3.csv")),
        "reruns must be byte-identical"
    );
}

#[test]
fn svg_panels_are_emitted_on_request() {
    let out = tmp_dir("svg");
    let res = run(&[
        "fig1",
        "--out",
        out.to_str().unwrap(),
        "--svg",
        "--grid-points",
        "32",
        "--t-max",
        "0.1",
        "--beta",
        "1.0",
    ]);
    assert!(res.status.success());
    for name in ["fig1_internal_energy.svg", "fig1_entropy_production.svg"] {
        let svg = read(&out.join(name));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("viewBox=\"0 0 800 600\""));
        assert!(svg.contains("<polyline"));
    }
}

#[test]
fn bad_config_exits_with_code_2() {
    let out = tmp_dir("bad");
    // points < 16 violates the grid invariant.
    let res = run(&["fig1", "--out", out.to_str().unwrap(), "--grid-points", "4"]);
    assert_eq!(res.status.code(), Some(2));
    // Unreadable config path.
    let res = run(&["fig1", "--config", "/nonexistent/sctherm.toml"]);
    assert_eq!(res.status.code(), Some(2));
    // Invalid model parameters from a config file.
    let dir = tmp_dir("badmodel");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "[model]\nkappa = 2.0\n").unwrap();
    let res = run(&["fig1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn config_file_with_overrides_and_custom_scenario() {
    let dir = tmp_dir("custom");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.toml");
    std::fs::write(
        &cfg_path,
        r#"
scenario = "custom"
betas = [0.5]
svg = false

[model]
kappa = 0.8

[time_grid]
t_max = 0.2
points = 40

[initial_state]
kind = "gibbs"

[drive]
kind = "ramp"
factor = 1.05
ramp_time = 0.1
"#,
    )
    .unwrap();
    let out = dir.join("results");
    let res = run(&[
        "custom",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = read(&out.join("custom.csv"));
    assert!(csv
        .lines()
        .next()
        .unwrap()
        .starts_with("t,beta,e_u,f,s,q,w,sigma,sigma_rate"));
    // Driving performs work: |W| > 0 on the last row.
    let last = csv.lines().last().unwrap();
    let w: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!(w.abs() > 1e-12, "ramp should perform work, got {w}");
    // Flag overrides file: grid-points from CLI wins.
    let res = run(&[
        "custom",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid-points",
        "24",
    ]);
    assert!(res.status.success());
    assert_eq!(read(&out.join("custom.csv")).lines().count(), 1 + 24);
}

#[test]
fn witness_reports_non_markovian_intervals() {
    let out = tmp_dir("witness");
    let res = run(&[
        "witness",
        "--out",
        out.to_str().unwrap(),
        "--grid-points",
        "400",
        "--t-max",
        "0.5",
        "--beta",
        "1.0",
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("non-Markovian"), "stdout: {stdout}");
    let csv = read(&out.join("witness.csv"));
    assert_eq!(
        csv.lines().next().unwrap(),
        "beta,t_start,t_end,min_sigma_rate,confirmed_non_cp"
    );
    assert!(
        csv.lines().count() > 1,
        "expected at least one interval row"
    );
}

#[test]
fn measured_initial_state_scenario_runs() {
    let dir = tmp_dir("measured");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.toml");
    std::fs::write(
        &cfg_path,
        r#"
[initial_state]
kind = "measured"
basis = "equilibrium"

[time_grid]
t_max = 0.2
points = 32
"#,
    )
    .unwrap();
    let out = dir.join("results");
    let res = run(&[
        "custom",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    // σ(0) = 0 for the non-disturbing measurement.
    let csv = read(&out.join("custom.csv"));
    let first = csv.lines().nth(1).unwrap();
    let sigma: f64 = first.split(',').nth(7).unwrap().parse().unwrap();
    assert!(sigma.abs() < 1e-8);
}
