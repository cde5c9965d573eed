//! End-to-end tests of the command-line surface: config parsing, artifact
//! schemas, manifests, determinism and error shapes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_doublewell"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("doublewell-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SQUARE_CFG: &str = r#"
[potential]
family = "square"
b = 6.0
d = 2.0
v0 = 2.0

[solve]
levels = ["ground", "first-excited"]
grid_points = 2001

[mfpt]
a = -3.0
x_start = -2.0
x_end = 2.0
grid_points = 8001

[ensemble]
n = 300
dt = 1e-3
x_init = -2.0
absorb = 2.0
seed = 11
histogram_bins = 20
"#;

#[test]
fn solve_writes_levels_states_and_manifest() {
    let dir = tmp_dir("solve");
    let cfg = dir.join("run.toml");
    write(&cfg, SQUARE_CFG);
    let out_dir = dir.join("out");
    run_ok(&[
        "solve",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);

    let levels = std::fs::read_to_string(out_dir.join("levels.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&levels).unwrap();
    assert_eq!(parsed["schema"], "doublewell.solve.v1");
    let e0 = parsed["levels"][0]["energy"].as_f64().unwrap();
    assert!((e0 - 0.746226).abs() < 1e-4, "ground energy {e0}");

    let state = std::fs::read_to_string(out_dir.join("state_ground.csv")).unwrap();
    assert!(state.starts_with("# schema=doublewell.solve.state.v1\n"));
    assert!(state.lines().nth(1).unwrap().starts_with("x,psi,v"));

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("solve_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["subcommand"], "solve");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 16);
}

#[test]
fn mfpt_matches_reference_value() {
    let dir = tmp_dir("mfpt");
    let cfg = dir.join("run.toml");
    write(&cfg, SQUARE_CFG);
    let out_dir = dir.join("out");
    let out = run_ok(&[
        "mfpt",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("tau = 55.89"), "summary: {stdout}");
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("mfpt.json")).unwrap(),
    )
    .unwrap();
    let tau = report["tau"].as_f64().unwrap();
    assert!((tau - 55.90).abs() / 55.90 < 0.005);
}

#[test]
fn ensemble_reruns_are_byte_identical_and_seed_sensitive() {
    let dir = tmp_dir("ensemble");
    let cfg = dir.join("run.toml");
    write(&cfg, SQUARE_CFG);
    let (a, b, c) = (dir.join("a"), dir.join("b"), dir.join("c"));
    for out_dir in [&a, &b] {
        run_ok(&[
            "ensemble",
            "-c",
            cfg.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
    }
    run_ok(&[
        "ensemble",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        c.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    for name in [
        "ensemble_fpt.csv",
        "ensemble_summary.json",
        "ensemble_histogram.csv",
        "ensemble_manifest.json",
    ] {
        let fa = std::fs::read(a.join(name)).unwrap();
        let fb = std::fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between identical runs");
    }
    let fa = std::fs::read(a.join("ensemble_fpt.csv")).unwrap();
    let fc = std::fs::read(c.join("ensemble_fpt.csv")).unwrap();
    assert_ne!(fa, fc, "different seeds must change the records");
}

#[test]
fn ensemble_dry_run_exits_zero_with_empty_manifest() {
    let dir = tmp_dir("dryrun");
    let cfg = dir.join("run.toml");
    write(&cfg, &SQUARE_CFG.replace("n = 300", "n = 0"));
    let out_dir = dir.join("out");
    let out = run_ok(&[
        "ensemble",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("dry run ok"));
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("ensemble_manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 0);
}

#[test]
fn tail_fit_consumes_ensemble_output() {
    let dir = tmp_dir("tailfit");
    let cfg = dir.join("run.toml");
    let out_dir = dir.join("out");
    let fpt = out_dir.join("ensemble_fpt.csv");
    write(
        &cfg,
        &format!(
            "{SQUARE_CFG}\n[tail_fit]\ninput = \"{}\"\n",
            fpt.display()
        ),
    );
    run_ok(&[
        "ensemble",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    run_ok(&[
        "tail-fit",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    let fit: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("tail_fit.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(fit["schema"], "doublewell.tail-fit.v1");
    let tau_l = fit["tau_l"].as_f64().unwrap();
    assert!(tau_l > 30.0 && tau_l < 80.0, "tau_l = {tau_l}");
}

#[test]
fn unknown_config_key_is_named_and_exits_two() {
    let dir = tmp_dir("badkey");
    let cfg = dir.join("run.toml");
    write(&cfg, "[potential]\nfamily = \"square\"\nb = 6.0\nd = 2.0\nv0 = 2.0\nwidht = 3.0\n");
    let out = bin()
        .args(["solve", "-c", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let err: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(
        err["error"].as_str().unwrap().contains("widht"),
        "error must name the key: {stdout}"
    );
}

#[test]
fn ammonia_pinned_parameters_report() {
    let dir = tmp_dir("ammonia");
    let cfg = dir.join("run.toml");
    write(
        &cfg,
        r#"
[ammonia]
a = 398.0
b = 2810.0
grid_points = 4001
"#,
    );
    let out_dir = dir.join("out");
    run_ok(&[
        "ammonia",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("ammonia_report.json")).unwrap(),
    )
    .unwrap();
    let nu = report["nu_sq_ghz"].as_f64().unwrap();
    assert!((nu - 23.45).abs() < 0.2, "nu_sq = {nu}");
    let levels = std::fs::read_to_string(out_dir.join("ammonia_levels.csv")).unwrap();
    assert!(levels.contains("E0_minus"));
}

#[test]
fn floats_round_trip_at_full_precision() {
    let dir = tmp_dir("roundtrip");
    let cfg = dir.join("run.toml");
    write(&cfg, SQUARE_CFG);
    let out_dir = dir.join("out");
    run_ok(&[
        "mfpt",
        "-c",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("mfpt.json")).unwrap(),
    )
    .unwrap();
    // serde_json serializes f64 shortest-round-trip; parsing back must be
    // bit-exact.
    let tau = report["tau"].as_f64().unwrap();
    let reparsed: f64 = serde_json::to_string(&tau).unwrap().parse().unwrap();
    assert_eq!(tau.to_bits(), reparsed.to_bits());
}
