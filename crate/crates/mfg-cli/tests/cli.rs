//! End-to-end tests of the `mfg` binary: exit codes, artifact layout,
//! checksum validation, determinism, and the solve -> diagnose round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mfg")
}

/// Fresh scratch directory for one test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("mfg-cli-tests")
        .join(format!("{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).expect("write config");
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).expect("read json")).expect("parse json")
}

const UNIFORM: &str = "\
[model]
family = quadratic
coupling = linear
coupling_a = 1
[grid]
n_x = 32
n_t = 32
horizon = 1
[problem]
kind = terminal_cost
initial_density = uniform
terminal_cost = linear
cost_a = 1
cost_b = 0
[diagnostics]
seed = 7
suite = bounds,convexity,monotonicity
";

const PLANNING: &str = "\
[model]
family = quadratic
coupling = linear
coupling_a = 1
[grid]
n_x = 32
n_t = 32
horizon = 1
[problem]
kind = planning
initial_density = cosine(0.3)
terminal_density = cosine(-0.3)
[diagnostics]
seed = 11
monotonicity_samples = 500
suite = bounds,convexity,monotonicity
";

const SIGNED_TARGET: &str = "\
[model]
family = quadratic
coupling = linear
coupling_a = 1
[grid]
n_x = 32
n_t = 32
horizon = 1
[problem]
kind = planning
initial_density = cosine(0.3)
terminal_density = signed(1.1)
[solver]
epsilon_min = 0.002
[diagnostics]
seed = 7
";

const SWEEP: &str = "\
[model]
family = quadratic
coupling = linear
coupling_a = 1
[grid]
n_x = 16
n_t = 16
horizon = 1
[problem]
kind = terminal_cost
initial_density = cosine(0.3)
terminal_cost = linear
cost_a = 1
cost_b = 0
[diagnostics]
seed = 3
[sweep]
t_values = 2,4
";

/// Uniform data: converged solve with tiny residuals, then a diagnose pass
/// that validates checksums and reproduces the verification residuals
/// exactly (17 significant digits round-trip through CSV).
#[test]
fn solve_then_diagnose_round_trip() {
    let dir = scratch("roundtrip");
    let cfg = write_cfg(&dir, "run.cfg", UNIFORM);
    let out = dir.join("run");

    let (code, _, err) = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "solve failed: {err}");
    for name in ["u.csv", "m.csv", "verify.json", "manifest.json"] {
        assert!(out.join(name).is_file(), "missing artifact {name}");
    }
    let verify = read_json(&out.join("verify.json"));
    assert_eq!(verify["verdict"], "CONVERGED");
    for key in ["hj_residual", "continuity_residual", "mass_error"] {
        let v = verify["verify"][key].as_f64().unwrap();
        assert!(v <= 1e-10, "{key} = {v} above 1e-10");
    }

    let (code, stdout, err) = run(&["diagnose", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "diagnose failed: {err}");
    assert!(stdout.contains("bounds: PASS"), "stdout: {stdout}");
    let diag = read_json(&out.join("diagnostics.json"));
    assert_eq!(diag["all_pass"], true);
    // The recomputed residuals must agree bit for bit with the stored ones.
    for key in ["hj_residual", "continuity_residual", "mass_error"] {
        let stored = verify["verify"][key].as_f64().unwrap();
        let redone = diag["report"]["verify"][key].as_f64().unwrap();
        assert_eq!(
            stored.to_bits(),
            redone.to_bits(),
            "{key} changed across the round trip: {stored} vs {redone}"
        );
    }
}

/// A sign-changing terminal target admits no solution: exit 2 and a
/// NO_SOLUTION verdict, with no field dumps.
#[test]
fn signed_target_reports_no_solution() {
    let dir = scratch("signed");
    let cfg = write_cfg(&dir, "run.cfg", SIGNED_TARGET);
    let out = dir.join("run");
    let (code, _, err) = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {err}");
    let verify = read_json(&out.join("verify.json"));
    assert_eq!(verify["verdict"], "NO_SOLUTION");
    assert_eq!(verify["probe"]["nonexistence_detected"], true);
    assert!(!out.join("u.csv").exists(), "no fields for a failed solve");
    assert!(out.join("manifest.json").is_file());
}

/// Config errors exit 1 and name the offending line and key.
#[test]
fn config_errors_name_line_and_key() {
    let dir = scratch("badcfg");

    let bad = UNIFORM.replace("n_x = 32", "n_x = -4");
    let cfg = write_cfg(&dir, "neg.cfg", &bad);
    let out = dir.join("neg");
    let (code, _, err) = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("n_x"), "stderr should name the key: {err}");
    assert!(err.contains("line 6"), "stderr should give the line: {err}");

    let bad = format!("{UNIFORM}n_y = 4\n");
    let cfg = write_cfg(&dir, "unknown.cfg", &bad);
    let (code, _, err) = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("n_y"), "stderr should name the key: {err}");

    let (code, _, err) = run(&[
        "solve",
        "--config",
        dir.join("absent.cfg").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read config"), "stderr: {err}");
}

/// Structurally inadmissible data (a signed initial density) exits 3 with
/// an ASSUMPTIONS_FAILED report.
#[test]
fn signed_initial_density_is_an_assumption_failure() {
    let dir = scratch("badinit");
    let bad = UNIFORM.replace("initial_density = uniform", "initial_density = signed(1.1)");
    let cfg = write_cfg(&dir, "run.cfg", &bad);
    let out = dir.join("run");
    let (code, _, err) = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "stderr: {err}");
    let verify = read_json(&out.join("verify.json"));
    assert_eq!(verify["verdict"], "ASSUMPTIONS_FAILED");
}

/// Horizon sweeps write one subdirectory per T plus the two cross-horizon
/// reports, run members concurrently, and reject degenerate horizons.
#[test]
fn sweep_writes_member_dirs_and_reports() {
    let dir = scratch("sweep");
    let cfg = write_cfg(&dir, "run.cfg", SWEEP);
    let out = dir.join("run");
    let (code, _, err) = run(&[
        "sweep-T",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    for member in ["T2", "T4"] {
        for name in ["u.csv", "m.csv", "verify.json", "manifest.json"] {
            assert!(out.join(member).join(name).is_file(), "{member}/{name}");
        }
    }
    let turnpike = read_json(&out.join("turnpike.json"));
    let members = turnpike["members"].as_array().unwrap();
    assert_eq!(members.len(), 2);
    for m in members {
        assert_eq!(m["verdict"], "CONVERGED");
        assert!(m["fit"]["rate"].as_f64().unwrap() > 0.0);
    }
    let compare = read_json(&out.join("horizon_compare.json"));
    assert_eq!(compare["pairs"].as_array().unwrap().len(), 1);
    assert!(compare["pairs"][0]["max_diff"].as_f64().unwrap() >= 0.0);

    // Degenerate member: shorter than ten base time steps.
    let bad = SWEEP.replace("t_values = 2,4", "t_values = 2,0.001");
    let cfg = write_cfg(&dir, "bad.cfg", &bad);
    let (code, _, err) = run(&[
        "sweep-T",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("bad").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("t_values"), "stderr: {err}");
}

/// Corrupting a stored field breaks the manifest checksum: exit 1.
#[test]
fn diagnose_rejects_corrupted_fields() {
    let dir = scratch("corrupt");
    let cfg = write_cfg(&dir, "run.cfg", UNIFORM);
    let out = dir.join("run");
    let (code, _, err) = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");

    let m_path = out.join("m.csv");
    let text = fs::read_to_string(&m_path).unwrap();
    // Flip the sign of the last value.
    let flipped = {
        let k = text.trim_end().rfind(',').unwrap();
        format!("{}{}", &text[..k + 1], format_args!("-{}", &text[k + 1..]))
    };
    assert_ne!(text, flipped);
    fs::write(&m_path, flipped).unwrap();

    let (code, _, err) = run(&["diagnose", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(
        err.contains("checksum mismatch for m.csv"),
        "stderr: {err}"
    );
}

/// Identical config and seed produce byte-identical reports, for both the
/// solve artifacts and a repeated diagnosis.
#[test]
fn reports_are_byte_identical_for_fixed_seed() {
    let dir = scratch("determinism");
    let cfg = write_cfg(&dir, "run.cfg", PLANNING);
    let (out_a, out_b) = (dir.join("a"), dir.join("b"));
    for out in [&out_a, &out_b] {
        let (code, _, err) = run(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {err}");
        let (code, _, err) = run(&["diagnose", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "stderr: {err}");
    }
    for name in ["verify.json", "u.csv", "m.csv", "diagnostics.json"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

/// check-model prints the sampled margins and exits 0 for a sound model;
/// --out also stores assumptions.json.
#[test]
fn check_model_reports_margins() {
    let dir = scratch("checkmodel");
    let cfg = write_cfg(
        &dir,
        "model.cfg",
        "[model]\nfamily = congestion\nalpha = 0.5\nc0 = 0.1\ncoupling = log\ncoupling_a = 2\n",
    );
    let out = dir.join("report");
    let (code, stdout, err) = run(&[
        "check-model",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {err}");
    let value: Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(value["ok"], true);
    assert!(value["min_hpp"].as_f64().unwrap() > 0.0);
    assert!(out.join("assumptions.json").is_file());
}
