//! End-to-end checks of the `vf` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vf"))
}

fn run(args: &[&str]) -> Output {
    vf().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vf-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_constant_trace(path: &Path, dim: &str, value: f64, samples: usize) {
    let mut text = format!("t,{dim}\n");
    for i in 0..samples {
        text.push_str(&format!("{:.1},{}\n", i as f64 * 0.1, value));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn falsify_writes_witness_and_monitor_confirms() {
    let dir = tmp_dir("falsify");
    let out = run(&[
        "falsify",
        "--model",
        "integrator",
        "--spec",
        "SI1",
        "--algo",
        "shc",
        "--budget",
        "2500",
        "--seed",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("SI1: FALSIFIED"), "{text}");
    assert!(text.contains("witness="), "{text}");
    let witness = dir.join("SI1_witness.csv");
    assert!(witness.exists());
    assert!(dir.join("SI1_witness_input.json").exists());

    let mon = run(&["monitor", "--trace", witness.to_str().unwrap(), "--spec", "SI1"]);
    assert_eq!(mon.status.code(), Some(1), "negative robustness exits 1");
    let value: f64 = stdout(&mon).trim().parse().unwrap();
    assert!(value < 0.0, "witness robustness {value}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_spec_id_exits_2() {
    let out = run(&["falsify", "--model", "integrator", "--spec", "SI99", "--algo", "ur"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown spec id"), "{}", stderr(&out));
}

#[test]
fn spec_file_with_inline_formula_runs() {
    let dir = tmp_dir("specfile");
    let spec_file = dir.join("custom.stl");
    std::fs::write(&spec_file, "# inline spec\nalways[0,30] (y < 5)\n").unwrap();
    let out = run(&[
        "falsify",
        "--model",
        "integrator",
        "--spec-file",
        spec_file.to_str().unwrap(),
        "--algo",
        "shc",
        "--budget",
        "2500",
        "--seed",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("inline2: FALSIFIED"), "{}", stdout(&out));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unfalsifiable_spec_exits_1() {
    // y > -25 cannot be driven below -25 within the bounds and a tiny budget
    let dir = tmp_dir("unfals");
    let out = run(&[
        "falsify",
        "--model",
        "integrator",
        "--formula",
        "always[0,30] (y > -100)",
        "--algo",
        "ur",
        "--budget",
        "50",
        "--seed",
        "5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("not falsified"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn monitor_prints_six_decimals() {
    let dir = tmp_dir("monitor");
    let trace = dir.join("zero.csv");
    write_constant_trace(&trace, "y", 0.0, 301);
    let out = run(&["monitor", "--trace", trace.to_str().unwrap(), "--formula", "always[0,30] (y < 25)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "25.000000");

    let out = run(&[
        "monitor",
        "--trace",
        trace.to_str().unwrap(),
        "--formula",
        "not always[0,30] (y < 25)",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out).trim(), "-25.000000");

    let gear = dir.join("gear.csv");
    write_constant_trace(&gear, "gear", 4.0, 301);
    let out = run(&["monitor", "--trace", gear.to_str().unwrap(), "--formula", "always[0,30] (gear == 4)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "0.500000");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn list_specs_covers_all_suites() {
    let out = run(&["list-specs"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 74);
    for id in ["SI1", "SI16", "AT1", "AT40", "CC1", "CC18"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{id}\t"))), "missing {id}");
    }
}

#[test]
fn simulate_writes_parseable_trace() {
    let dir = tmp_dir("simulate");
    let trace = dir.join("trace.csv");
    let out = run(&[
        "simulate",
        "--model",
        "at",
        "--seed",
        "9",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("t,speed,RPM,gear\n"));
    assert_eq!(text.lines().count(), 302);

    // explicit input file path
    let input = dir.join("input.json");
    std::fs::write(&input, "[0.0, 0.0, 1.0, 0.0, 0.5, 0.5, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.25, 0.5, -0.5]").unwrap();
    let trace2 = dir.join("trace2.csv");
    let out = run(&[
        "simulate",
        "--model",
        "integrator",
        "--input",
        input.to_str().unwrap(),
        "--out",
        trace2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn vf_seed_env_is_the_fallback() {
    let dir = tmp_dir("envseed");
    let t1 = dir.join("a.csv");
    let t2 = dir.join("b.csv");
    let t3 = dir.join("c.csv");
    for (path, seed) in [(&t1, "77"), (&t2, "77"), (&t3, "78")] {
        let out = vf()
            .args(["simulate", "--model", "integrator", "--out", path.to_str().unwrap()])
            .env("VF_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let (a, b, c) = (
        std::fs::read(&t1).unwrap(),
        std::fs::read(&t2).unwrap(),
        std::fs::read(&t3).unwrap(),
    );
    assert_eq!(a, b, "same seed, same trace");
    assert_ne!(a, c, "different seed, different trace");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tmp_dir("config");
    let config = dir.join("run.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "model": "integrator",
            "specs": ["SI1"],
            "budget": 2500,
            "seed": 1,
            "out": dir.join("from-config").to_str().unwrap(),
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["falsify", "--config", config.to_str().unwrap(), "--algo", "shc"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(dir.join("from-config").join("SI1_witness.csv").exists());

    // flag overrides the configured output directory
    let out = run(&[
        "falsify",
        "--config",
        config.to_str().unwrap(),
        "--algo",
        "shc",
        "--out",
        dir.join("from-flag").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("from-flag").join("SI1_witness.csv").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn external_model_runs_through_the_cli() {
    let dir = tmp_dir("external");
    let spec = dir.join("echo.json");
    std::fs::write(
        &spec,
        serde_json::json!({
            "name": "echo",
            "input_dims": [["u", -1.0, 1.0]],
            "output_dims": ["u1"],
            "horizon": 30.0,
            "segment_step": 2.0,
        })
        .to_string(),
    )
    .unwrap();
    let echo_bin = Path::new(env!("CARGO_BIN_EXE_vf"))
        .parent()
        .unwrap()
        .join("echo_model");
    if !echo_bin.exists() {
        // built automatically under `cargo test --workspace`; build it here
        // when this crate's tests run alone
        let status = Command::new(std::env::var("CARGO").unwrap_or_else(|_| "cargo".into()))
            .args(["build", "-p", "vf-core", "--bin", "echo_model"])
            .status()
            .expect("cargo build echo_model");
        assert!(status.success());
    }
    let out = run(&[
        "falsify",
        "--model",
        "external",
        "--endpoint",
        echo_bin.to_str().unwrap(),
        "--model-spec",
        spec.to_str().unwrap(),
        "--formula",
        "always[0,30] (u1 < 0.9)",
        "--algo",
        "ur",
        "--budget",
        "200",
        "--seed",
        "11",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("FALSIFIED"));
    std::fs::remove_dir_all(&dir).unwrap();
}
