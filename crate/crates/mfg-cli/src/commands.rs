//! The four batch commands: solve, sweep-T, diagnose, check-model.
//!
//! Exit codes partition outcomes with no overlap:
//! 0 converged and all requested verdicts pass; 1 input error (config,
//! validation, missing or corrupted files); 2 solver nonconvergence
//! (including a detected non-existence verdict); 3 structural assumption
//! failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde_json::{json, Value};

use mfg_core::{
    counterexample_probe, diagnose, discrete_rate, field_from_csv, field_to_csv,
    infinite_horizon_compare, linearized_rate, midpoint_distance, solve, solve_degenerate,
    strictly_decreasing, turnpike_fit, verify_solution, CheckRegion, ClampPolicy, PipelineError,
    ProblemKind, ProblemSpec, Solution, SolveMeta,
};

use crate::artifacts::{json_bytes, read_json, sha256_hex, to_json, RunWriter};
use crate::config::{self, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;

fn pipeline_exit(e: &PipelineError) -> i32 {
    match e {
        PipelineError::AssumptionFailure(_) => EXIT_ASSUMPTION,
        PipelineError::Model(_) | PipelineError::Grid(_) => EXIT_INPUT,
        _ => EXIT_NO_CONVERGENCE,
    }
}

pub struct SolveOutcome {
    pub code: i32,
    pub solution: Option<Solution>,
    pub error: Option<String>,
}

impl SolveOutcome {
    fn input(msg: String) -> Self {
        eprintln!("{msg}");
        SolveOutcome {
            code: EXIT_INPUT,
            solution: None,
            error: Some(msg),
        }
    }
}

/// Writes a failure report (for solver-stage failures) and maps the error to
/// its exit code. Input-stage errors produce no report files.
fn fail_from_pipeline(
    writer: RunWriter,
    cfg: &RunConfig,
    command: &str,
    e: &PipelineError,
) -> SolveOutcome {
    let code = pipeline_exit(e);
    let msg = e.to_string();
    if code != EXIT_INPUT {
        let verdict = if code == EXIT_ASSUMPTION {
            "ASSUMPTIONS_FAILED"
        } else {
            "NO_CONVERGENCE"
        };
        let mut writer = writer;
        let _ = writer.write_json("verify.json", &json!({"verdict": verdict, "error": msg}));
        let _ = writer.finish(command, &cfg.to_canonical_text(), cfg.seed);
    }
    eprintln!("{msg}");
    SolveOutcome {
        code,
        solution: None,
        error: Some(msg),
    }
}

/// Probes a sign-changing planning target: walks the penalty ladder and
/// reports whether the terminal mismatch stagnates at the infeasibility
/// floor. No solution exists, so the exit code is always nonconvergence.
fn run_probe(
    mut writer: RunWriter,
    cfg: &RunConfig,
    command: &str,
    spec: &ProblemSpec,
    target: &mfg_core::DensitySlice,
) -> SolveOutcome {
    let cc = cfg.continuation();
    match counterexample_probe(&spec.model, spec.grid, &spec.initial_density, target, &cc) {
        Err(e) => fail_from_pipeline(writer, cfg, command, &e),
        Ok(rep) => {
            let verdict = if rep.nonexistence_detected {
                "NO_SOLUTION"
            } else {
                "UNRESOLVED"
            };
            writer.mark_phase("probe");
            let value = json!({"verdict": verdict, "probe": to_json(&rep)});
            if let Err(e) = writer.write_json("verify.json", &value) {
                return SolveOutcome::input(format!("cannot write verify.json: {e}"));
            }
            writer.mark_phase("write");
            if let Err(e) = writer.finish(command, &cfg.to_canonical_text(), cfg.seed) {
                return SolveOutcome::input(format!("cannot write manifest.json: {e}"));
            }
            let msg = format!(
                "terminal target is signed (min = {}); penalty ladder verdict: {verdict}",
                target.min()
            );
            eprintln!("{msg}");
            SolveOutcome {
                code: EXIT_NO_CONVERGENCE,
                solution: None,
                error: Some(msg),
            }
        }
    }
}

/// Writes the full artifact set for a converged solution.
fn write_solution(
    mut writer: RunWriter,
    cfg: &RunConfig,
    command: &str,
    spec: &ProblemSpec,
    solution: Solution,
    regularization: Option<Value>,
) -> SolveOutcome {
    let report = match verify_solution(spec, &solution, &ClampPolicy::default()) {
        Ok(r) => r,
        Err(e) => return fail_from_pipeline(writer, cfg, command, &e),
    };
    writer.mark_phase("verify");
    let mut value = json!({
        "verdict": "CONVERGED",
        "lambda": solution.lambda,
        "solve": to_json(&solution.meta),
        "verify": to_json(&report),
    });
    if let Some(stages) = regularization {
        value["regularization"] = stages;
    }
    let io = writer
        .write_text("u.csv", &field_to_csv(&solution.u))
        .and_then(|_| writer.write_text("m.csv", &field_to_csv(&solution.m)))
        .and_then(|_| writer.write_json("verify.json", &value));
    if let Err(e) = io {
        return SolveOutcome::input(format!("cannot write artifacts: {e}"));
    }
    writer.mark_phase("write");
    if let Err(e) = writer.finish(command, &cfg.to_canonical_text(), cfg.seed) {
        return SolveOutcome::input(format!("cannot write manifest.json: {e}"));
    }
    SolveOutcome {
        code: EXIT_OK,
        solution: Some(solution),
        error: None,
    }
}

/// One full solve into `dir`: model check, signed-target probe dispatch,
/// optional regularization ladder, then the Newton-continuation solve and
/// artifact writes.
pub fn run_solve_into(cfg: &RunConfig, dir: &Path, command: &str) -> SolveOutcome {
    let mut writer = match RunWriter::new(dir) {
        Ok(w) => w,
        Err(e) => {
            return SolveOutcome::input(format!(
                "cannot create output directory '{}': {e}",
                dir.display()
            ))
        }
    };
    let spec = match cfg.problem_spec() {
        Ok(s) => s,
        Err(e) => return SolveOutcome::input(e.to_string()),
    };

    if cfg.check_model {
        match spec.model.check_assumptions(&CheckRegion::default()) {
            Err(e) => {
                return SolveOutcome::input(format!("model check failed to evaluate: {e}"))
            }
            Ok(rep) if !rep.ok => {
                let e = PipelineError::AssumptionFailure(format!(
                    "model fails the structural inequalities: {}",
                    rep.violations.join("; ")
                ));
                return fail_from_pipeline(writer, cfg, command, &e);
            }
            Ok(_) => {}
        }
    }
    writer.mark_phase("setup");

    if let ProblemKind::Planning { terminal_density } = &spec.kind {
        if terminal_density.min() <= 0.0 {
            let target = terminal_density.clone();
            return run_probe(writer, cfg, command, &spec, &target);
        }
    }

    let mut opts = cfg.solve_options();
    opts.check_model = false;

    if !cfg.regularization_deltas.is_empty() {
        return match solve_degenerate(&spec, &cfg.regularization_deltas, &opts) {
            Err(e) => fail_from_pipeline(writer, cfg, command, &e),
            Ok(ladder) => {
                writer.mark_phase("solve");
                let stages = to_json(&ladder.stages);
                write_solution(writer, cfg, command, &spec, ladder.solution, Some(stages))
            }
        };
    }

    if let Err(e) = spec.validate(false) {
        return fail_from_pipeline(writer, cfg, command, &e);
    }
    match solve(&spec, &opts) {
        Err(e) => fail_from_pipeline(writer, cfg, command, &e),
        Ok(solution) => {
            writer.mark_phase("solve");
            write_solution(writer, cfg, command, &spec, solution, None)
        }
    }
}

pub fn cmd_solve(config_path: &Path, out: &Path, seed_override: Option<u64>) -> i32 {
    let mut cfg = match config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    let outcome = run_solve_into(&cfg, out, "solve");
    if outcome.code == EXIT_OK {
        println!("solve converged; artifacts in {}", out.display());
    }
    outcome.code
}

/// Time resolution policy for horizon sweeps: levels scale as `T^{3/2}`
/// relative to the smallest horizon, so each member's second-order time
/// bias shrinks like `1/T` and long-horizon comparisons are not swamped by
/// the coarsest member's drift.
fn sweep_n_t(base_n_t: usize, t_ref: f64, t: f64) -> usize {
    (((base_n_t - 1) as f64) * (t / t_ref).powf(1.5)).round() as usize + 1
}

struct SweepSlot {
    t: f64,
    n_t: usize,
    dir_name: String,
    code: i32,
    error: Option<String>,
    solution: Option<Solution>,
}

pub fn cmd_sweep_t(config_path: &Path, out: &Path, seed_override: Option<u64>, jobs: usize) -> i32 {
    let mut cfg = match config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    if cfg.t_values.is_empty() {
        eprintln!("config error: missing required key [sweep] t_values");
        return EXIT_INPUT;
    }
    let base_n_t = match cfg.n_t {
        Some(v) => v,
        None => {
            eprintln!("config error: missing required key [grid] n_t");
            return EXIT_INPUT;
        }
    };
    let base_horizon = match cfg.horizon {
        Some(v) => v,
        None => {
            eprintln!("config error: missing required key [grid] horizon");
            return EXIT_INPUT;
        }
    };
    let model = match cfg.model() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };

    // Every horizon must span at least ten steps of the configured base
    // grid; shorter members are degenerate sweeps, not solves.
    let dt_base = base_horizon / (base_n_t - 1).max(1) as f64;
    for &t in &cfg.t_values {
        if t < 10.0 * dt_base {
            eprintln!(
                "config error: [sweep] t_values: T = {t} is shorter than ten base time steps (10 dt = {}); shrink [grid] horizon or refine n_t",
                10.0 * dt_base
            );
            return EXIT_INPUT;
        }
    }

    const MAX_SWEEP_N_T: usize = 2048;
    let t_ref = cfg.t_values[0];
    let members: Vec<(f64, usize)> = cfg
        .t_values
        .iter()
        .map(|&t| (t, sweep_n_t(base_n_t, t_ref, t)))
        .collect();
    for &(t, n_t) in &members {
        // T >= 10 dt with dt = T/(n_t - 1) is exactly n_t >= 11.
        if n_t < 11 {
            eprintln!(
                "config error: [sweep] t_values: T = {t} yields {n_t} time levels, below the minimum 11 (T < 10 dt); increase [grid] n_t"
            );
            return EXIT_INPUT;
        }
        if n_t > MAX_SWEEP_N_T {
            eprintln!(
                "config error: [sweep] t_values: T = {t} needs {n_t} time levels under the T^(3/2) refinement policy, beyond the supported {MAX_SWEEP_N_T}; narrow the horizon span or coarsen [grid] n_t"
            );
            return EXIT_INPUT;
        }
    }

    let root_writer = match RunWriter::new(out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("cannot create output directory '{}': {e}", out.display());
            return EXIT_INPUT;
        }
    };
    let mut root_writer = root_writer;

    let slots: Mutex<Vec<Option<SweepSlot>>> =
        Mutex::new(members.iter().map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(members.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= members.len() {
                    break;
                }
                let (t, n_t) = members[i];
                let mut member_cfg = cfg.clone();
                member_cfg.horizon = Some(t);
                member_cfg.n_t = Some(n_t);
                member_cfg.t_values = Vec::new();
                let dir_name = format!("T{t}");
                let outcome = run_solve_into(&member_cfg, &out.join(&dir_name), "solve");
                slots.lock().unwrap()[i] = Some(SweepSlot {
                    t,
                    n_t,
                    dir_name,
                    code: outcome.code,
                    error: outcome.error,
                    solution: outcome.solution,
                });
            });
        }
    });
    root_writer.mark_phase("solve");
    let slots: Vec<SweepSlot> = slots
        .into_inner()
        .expect("sweep workers completed")
        .into_iter()
        .map(|s| s.expect("every member index visited"))
        .collect();

    // Turnpike fits per member.
    let predicted_rate = linearized_rate(&model).unwrap_or(0.0);
    let mut member_entries = Vec::new();
    let mut rates = Vec::new();
    for slot in &slots {
        match &slot.solution {
            Some(sol) => {
                let fit = turnpike_fit(sol);
                let dt = sol.m.grid().dt();
                rates.push(fit.rate);
                member_entries.push(json!({
                    "T": slot.t,
                    "n_t": slot.n_t,
                    "dir": slot.dir_name,
                    "verdict": "CONVERGED",
                    "fit": to_json(&fit),
                    "midpoint_distance": midpoint_distance(sol),
                    "predicted_rate_discrete": discrete_rate(predicted_rate, dt),
                }));
            }
            None => member_entries.push(json!({
                "T": slot.t,
                "n_t": slot.n_t,
                "dir": slot.dir_name,
                "verdict": "FAILED",
                "exit_code": slot.code,
                "error": slot.error.clone().unwrap_or_default(),
            })),
        }
    }
    let rate_spread = if rates.len() >= 2 {
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo > 0.0).then(|| (hi - lo) / lo)
    } else {
        None
    };
    let turnpike = json!({
        "members": member_entries,
        "predicted_rate": predicted_rate,
        "rate_spread": rate_spread,
        "rates_consistent": rate_spread.map(|s| s <= 0.2),
    });

    // Cross-horizon value comparison on the shared early window.
    let t_cap = 0.5 * t_ref;
    let converged: Vec<&SweepSlot> = slots.iter().filter(|s| s.solution.is_some()).collect();
    let mut pairs = Vec::new();
    for w in converged.windows(2) {
        let (a, b) = (w[0], w[1]);
        let entry = match infinite_horizon_compare(
            a.solution.as_ref().unwrap(),
            b.solution.as_ref().unwrap(),
            t_cap,
        ) {
            Ok(c) => json!({
                "t_a": a.t,
                "t_b": b.t,
                "levels": c.levels,
                "max_diff": c.max_diff,
                "series": c.series,
            }),
            Err(e) => json!({"t_a": a.t, "t_b": b.t, "error": e.to_string()}),
        };
        pairs.push(entry);
    }
    let mut midpoints = Vec::new();
    let profiles: Vec<Value> = converged
        .iter()
        .map(|slot| {
            let sol = slot.solution.as_ref().unwrap();
            let v = sol.value_anchored_at(sol.plateau_rate());
            let g = v.grid();
            let mid = (g.n_t - 1) / 2;
            let mean = v.level(mid).iter().sum::<f64>() / g.n_x as f64;
            let dist = midpoint_distance(sol);
            midpoints.push(dist);
            json!({
                "T": slot.t,
                "midpoint_distance": dist,
                "anchored_midpoint_mean": mean,
            })
        })
        .collect();
    let compare = json!({
        "t_cap": t_cap,
        "pairs": pairs,
        "profiles": profiles,
        "midpoints_strictly_decreasing": strictly_decreasing(&midpoints),
    });

    let io = root_writer
        .write_json("turnpike.json", &turnpike)
        .and_then(|_| root_writer.write_json("horizon_compare.json", &compare));
    if let Err(e) = io {
        eprintln!("cannot write sweep reports: {e}");
        return EXIT_INPUT;
    }
    root_writer.mark_phase("write");
    if let Err(e) = root_writer.finish("sweep-T", &cfg.to_canonical_text(), cfg.seed) {
        eprintln!("cannot write manifest.json: {e}");
        return EXIT_INPUT;
    }

    let codes: Vec<i32> = slots.iter().map(|s| s.code).collect();
    for code in [EXIT_INPUT, EXIT_ASSUMPTION, EXIT_NO_CONVERGENCE] {
        if codes.contains(&code) {
            return code;
        }
    }
    println!(
        "sweep converged for all {} horizons; reports in {}",
        slots.len(),
        out.display()
    );
    EXIT_OK
}

pub fn cmd_diagnose(out: &Path, seed_override: Option<u64>) -> i32 {
    let manifest = match read_json(&out.join("manifest.json")) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    let Some(config_text) = manifest.get("config").and_then(Value::as_str) else {
        eprintln!("manifest.json carries no config echo");
        return EXIT_INPUT;
    };
    let mut cfg = match config::parse(config_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("stored config echo is invalid: {e}");
            return EXIT_INPUT;
        }
    };
    if let Some(s) = seed_override {
        cfg.seed = s;
    }

    // Checksum validation of the stored fields.
    let Some(files) = manifest.get("files").and_then(Value::as_object) else {
        eprintln!("manifest.json carries no file checksums");
        return EXIT_INPUT;
    };
    let mut texts = Vec::new();
    for name in ["u.csv", "m.csv"] {
        let Some(stored) = files.get(name).and_then(Value::as_str) else {
            eprintln!("manifest.json lists no checksum for {name}");
            return EXIT_INPUT;
        };
        let bytes = match fs::read(out.join(name)) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("cannot read stored field {name}: {e}");
                return EXIT_INPUT;
            }
        };
        let computed = sha256_hex(&bytes);
        if computed != stored {
            eprintln!(
                "checksum mismatch for {name}: manifest records {stored}, file hashes to {computed}"
            );
            return EXIT_INPUT;
        }
        match String::from_utf8(bytes) {
            Ok(s) => texts.push(s),
            Err(e) => {
                eprintln!("stored field {name} is not UTF-8: {e}");
                return EXIT_INPUT;
            }
        }
    }
    let u = match field_from_csv(&texts[0]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("u.csv: {e}");
            return EXIT_INPUT;
        }
    };
    let m = match field_from_csv(&texts[1]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("m.csv: {e}");
            return EXIT_INPUT;
        }
    };

    let spec = match cfg.problem_spec() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("stored config echo is incomplete: {e}");
            return EXIT_INPUT;
        }
    };
    if u.grid() != spec.grid || m.grid() != spec.grid {
        eprintln!("stored fields do not match the [grid] block of the manifest config");
        return EXIT_INPUT;
    }
    let lambda = match spec.model.lambda_star() {
        Ok(l) => l,
        Err(e) => {
            eprintln!("model evaluation failed: {e}");
            return EXIT_INPUT;
        }
    };
    let solution = Solution {
        u,
        m,
        lambda,
        meta: SolveMeta {
            newton_iterations: 0,
            homotopy_stages: 0,
            homotopy_direct: true,
            continuation: None,
            clamped_nodes: 0,
            residual_norm: 0.0,
        },
    };

    let report = match diagnose(&spec, &solution, None, cfg.seed, cfg.monotonicity_samples) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return pipeline_exit(&e);
        }
    };

    let mut verdicts = BTreeMap::new();
    let mut all_pass = true;
    for name in &cfg.suite {
        let pass = match name.as_str() {
            "bounds" => {
                report.verify.lower_bound_violation <= 1e-6
                    && report.verify.upper_bound_violation <= 1e-6
            }
            "convexity" => {
                let scale = report.entropy.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                // Second differences divide by dt^2, so a flat profile still
                // carries roundoff of that order; the absolute floor keeps a
                // numerically zero entropy series from tripping the verdict.
                let dt = report.grid.dt();
                let tol = 1e-4 * scale + 1e-12 / (dt * dt);
                report.entropy_min_second_difference >= -tol
            }
            "monotonicity" => report.monotonicity.min_gap >= -1e-12,
            "turnpike" => report.turnpike.rate > 0.0 && report.turnpike.r2 >= 0.95,
            _ => unreachable!("suite names validated at parse"),
        };
        all_pass &= pass;
        verdicts.insert(name.clone(), if pass { "PASS" } else { "FAIL" });
    }

    let value = json!({
        "seed": cfg.seed,
        "verdicts": verdicts,
        "all_pass": all_pass,
        "report": to_json(&report),
    });
    if let Err(e) = fs::write(out.join("diagnostics.json"), json_bytes(&value)) {
        eprintln!("cannot write diagnostics.json: {e}");
        return EXIT_INPUT;
    }
    for (name, verdict) in value["verdicts"].as_object().unwrap() {
        println!("{name}: {}", verdict.as_str().unwrap());
    }
    if all_pass {
        EXIT_OK
    } else {
        eprintln!("one or more requested property verdicts failed");
        EXIT_ASSUMPTION
    }
}

fn finite_or_string(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

pub fn cmd_check_model(config_path: &Path, out: Option<&Path>) -> i32 {
    let cfg = match config::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    let model = match cfg.model() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    let region = CheckRegion::default();
    let report = match model.check_assumptions(&region) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("model evaluation failed on the sample region: {e}");
            return EXIT_INPUT;
        }
    };
    let consistency = match model.derivative_consistency(&region) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("model evaluation failed on the sample region: {e}");
            return EXIT_INPUT;
        }
    };
    let worst: BTreeMap<String, f64> = consistency
        .into_iter()
        .map(|(order, err)| (format!("{order:?}"), err))
        .collect();
    // The ellipticity margin: ratio r > 1 means the inequality holds with
    // constant C0 = 1/(r - 1); an infinite ratio (no cross term) leaves C0
    // unconstrained.
    let largest_c0 = if report.min_ellipticity_ratio.is_finite()
        && report.min_ellipticity_ratio > 1.0
    {
        json!(1.0 / (report.min_ellipticity_ratio - 1.0))
    } else {
        Value::Null
    };
    let value = json!({
        "model": model.describe(),
        "ok": report.ok,
        "samples": report.samples,
        "min_hpp": report.min_hpp,
        "max_hm": report.max_hm,
        "min_det": report.min_det,
        "min_ellipticity_ratio": finite_or_string(report.min_ellipticity_ratio),
        "largest_c0": largest_c0,
        "violations": report.violations,
        "derivative_consistency": worst,
        "region": {
            "p_max": region.p_max,
            "m_min": region.m_min,
            "m_max": region.m_max,
            "n_p": region.n_p,
            "n_m": region.n_m,
        },
    });
    print!("{}", String::from_utf8(json_bytes(&value)).expect("JSON is UTF-8"));
    if let Some(dir) = out {
        let mut writer = match RunWriter::new(dir) {
            Ok(w) => w,
            Err(e) => {
                eprintln!("cannot create output directory '{}': {e}", dir.display());
                return EXIT_INPUT;
            }
        };
        writer.mark_phase("check");
        let io = writer
            .write_json("assumptions.json", &value)
            .and_then(|_| writer.finish("check-model", &cfg.to_canonical_text(), cfg.seed));
        if let Err(e) = io {
            eprintln!("cannot write assumptions.json: {e}");
            return EXIT_INPUT;
        }
    }
    if report.ok {
        EXIT_OK
    } else {
        eprintln!(
            "model fails the structural inequalities: {}",
            report.violations.join("; ")
        );
        EXIT_ASSUMPTION
    }
}
