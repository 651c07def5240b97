//! End-to-end acceptance suite. Each check verifies one shipped structural
//! claim at the default desk scale (64x64 space-time grid unless a check
//! states otherwise) and prints a PASS/FAIL line with the measured numbers;
//! the test fails if any check fails. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::time::Instant;

use mfg_core::elliptic::{assemble_residual, assemble_system, jacobian_matrix};
use mfg_core::{
    counterexample_probe, epsilon_continuation, homotopy_solve_with_schedule, infinite_horizon_compare,
    integral_series, midpoint_distance, monotonicity_gap, monotonicity_scan, newton_solve,
    second_differences, solve, solve_degenerate, strictly_decreasing, turnpike_fit,
    uniform_state_guess, verify_solution, CheckRegion, ClampPolicy, ContinuationConfig, Coupling,
    DensitySlice, Field, GridSpec, HamiltonianModel, NewtonConfig, ProblemKind, ProblemSpec,
    Solution, SolveOptions, TerminalCost,
};

/// The quadratic separated model with linear coupling and terminal law
/// g(m) = m: every density-data check runs on it.
fn pinned() -> HamiltonianModel {
    HamiltonianModel::quadratic(Coupling::Linear { a: 1.0 }).unwrap()
}

fn cost_spec(n_x: usize, n_t: usize, horizon: f64, amplitude: f64) -> ProblemSpec {
    ProblemSpec {
        model: pinned(),
        grid: GridSpec::new(n_x, n_t, horizon).unwrap(),
        initial_density: DensitySlice::cosine(n_x, amplitude).unwrap(),
        kind: ProblemKind::TerminalCost {
            cost: TerminalCost::Linear { a: 1.0, b: 0.0 },
        },
    }
}

fn planning_spec(n: usize) -> ProblemSpec {
    ProblemSpec {
        model: pinned(),
        grid: GridSpec::new(n, n, 1.0).unwrap(),
        initial_density: DensitySlice::cosine(n, 0.3).unwrap(),
        kind: ProblemKind::Planning {
            terminal_density: DensitySlice::cosine(n, -0.3).unwrap(),
        },
    }
}

struct Suite {
    failures: Vec<String>,
}

impl Suite {
    fn record(&mut self, name: &str, passed: bool, detail: String) {
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {name}: {detail}");
        if !passed {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

/// Uniform data reproduces the closed-form equilibrium to near machine
/// precision: u(x,t) = g(1) + (t - T) H(0,1) and m = 1.
fn uniform_equilibrium(suite: &mut Suite) {
    let spec = cost_spec(64, 64, 1.0, 0.0);
    let sol = solve(&spec, &SolveOptions::default()).unwrap();
    let exact = uniform_state_guess(&spec.elliptic_problem(1.0).unwrap()).unwrap();
    let err_u = sol.u.max_abs_diff(&exact).unwrap();
    let err_m = sol
        .m
        .values()
        .iter()
        .fold(0.0f64, |a, v| a.max((v - 1.0).abs()));
    suite.record(
        "uniform-equilibrium-exactness",
        err_u <= 1e-9 && err_m <= 1e-9,
        format!("max|u-exact|={err_u:.2e} max|m-1|={err_m:.2e} (tol 1e-9)"),
    );
}

/// Density extremes never escape the data extremes by more than 1e-6, for
/// both the terminal-cost game (m0 = 1+0.3cos) and the planning game
/// (terminal density 1-0.3cos).
fn density_bounds(suite: &mut Suite) {
    let opts = SolveOptions::default();
    let clamp = ClampPolicy::default();

    let spec = cost_spec(64, 64, 1.0, 0.3);
    let r1 = verify_solution(&spec, &solve(&spec, &opts).unwrap(), &clamp).unwrap();
    let spec = planning_spec(64);
    let r2 = verify_solution(&spec, &solve(&spec, &opts).unwrap(), &clamp).unwrap();

    let ok = |r: &mfg_core::VerifyReport| r.m_min >= 0.7 - 1e-6 && r.m_max <= 1.3 + 1e-6;
    suite.record(
        "density-bounds",
        ok(&r1) && ok(&r2),
        format!(
            "cost m in [{:.9}, {:.9}], planning m in [{:.9}, {:.9}], data [0.7, 1.3] (tol 1e-6)",
            r1.m_min, r1.m_max, r2.m_min, r2.m_max
        ),
    );
}

/// Along the solved flow, t -> integral of h(m(., t)) stays convex in the
/// discrete sense for h in {m^2, m^4, 1/m}: all interior second differences
/// exceed -1e-4 * scale, at every refinement 32 -> 64 -> 128, and the worst
/// margin converges under refinement (consecutive-difference ratio <= 0.75).
fn displacement_convexity(suite: &mut Suite) {
    let opts = SolveOptions::default();
    let hs: [(&str, fn(f64) -> f64); 3] = [
        ("m^2", |v| v * v),
        ("m^4", |v| v.powi(4)),
        ("1/m", |v| 1.0 / v),
    ];
    let mut margins = vec![Vec::new(); hs.len()]; // per h, per grid
    let mut bound_ok = true;
    let mut detail = String::new();
    for n in [32usize, 64, 128] {
        let spec = cost_spec(n, n, 1.0, 0.3);
        let sol = solve(&spec, &opts).unwrap();
        let dt = sol.m.grid().dt();
        for (i, (name, h)) in hs.iter().enumerate() {
            let series = integral_series(&sol.m, h);
            let scale = series.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            let min_d2 = second_differences(&series, dt)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min_d2 < -1e-4 * scale {
                bound_ok = false;
                detail.push_str(&format!("VIOLATION n={n} h={name} min_d2={min_d2:.3e}; "));
            }
            margins[i].push(min_d2);
        }
    }
    let mut converge_ok = true;
    for (i, (name, _)) in hs.iter().enumerate() {
        let m = &margins[i];
        let ratio = (m[1] - m[2]).abs() / (m[0] - m[1]).abs().max(1e-300);
        if ratio > 0.75 {
            converge_ok = false;
        }
        detail.push_str(&format!(
            "{name}: margins {:+.2e}/{:+.2e}/{:+.2e} ratio {ratio:.2}; ",
            m[0], m[1], m[2]
        ));
    }
    suite.record(
        "displacement-convexity",
        bound_ok && converge_ok,
        format!("{detail}(bound -1e-4*scale, ratio <= 0.75)"),
    );
}

/// On the proper planning pair, the terminal mismatch decays linearly in the
/// penalty: consecutive ratios over epsilon = 2^-3 .. 2^-10 stay in
/// [0.4, 0.65].
fn penalization_rate(suite: &mut Suite) {
    let spec = planning_spec(64);
    let problem = spec.elliptic_problem(0.125).unwrap();
    let cfg = ContinuationConfig {
        epsilon_start: 0.125,
        epsilon_min: 2.0f64.powi(-10) * 0.999,
        target_terminal_error: 0.0,
        stop_on_stall: false,
        ..ContinuationConfig::default()
    };
    let (_, trace) = epsilon_continuation(&problem, &cfg).unwrap();
    let errors: Vec<f64> = trace.steps.iter().map(|s| s.terminal_error).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = errors.len() == 8 && ratios.iter().all(|r| (0.4..=0.65).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    suite.record(
        "penalization-rate",
        ok,
        format!(
            "{} ladder steps, consecutive error ratios {shown:?} (window [0.4, 0.65])",
            errors.len()
        ),
    );
}

/// A signed terminal target (1 - 1.1cos, dipping to -0.1) is unattainable:
/// the terminal error stagnates at or above 0.09 for every penalty at or
/// below 1e-2, and the probe reports nonexistence, while the proper target
/// from the rate check is cleared.
fn infeasible_target(suite: &mut Suite) {
    let n = 64;
    let grid = GridSpec::new(n, n, 1.0).unwrap();
    let m0 = DensitySlice::cosine(n, 0.3).unwrap();
    let signed = DensitySlice::cosine(n, -1.1).unwrap();
    let cfg = ContinuationConfig {
        epsilon_start: 1.0,
        epsilon_min: 1.5e-3,
        target_terminal_error: 0.0,
        stop_on_stall: false,
        ..ContinuationConfig::default()
    };
    let report = counterexample_probe(&pinned(), grid, &m0, &signed, &cfg).unwrap();

    let problem = mfg_core::EllipticProblem::new(
        pinned(),
        grid,
        m0.clone(),
        mfg_core::TerminalOperator::PenalizedDensity {
            target: signed.clone(),
            epsilon: cfg.epsilon_start,
        },
    )
    .unwrap();
    let (_, trace) = epsilon_continuation(&problem, &cfg).unwrap();
    let small: Vec<&mfg_core::ContinuationStep> = trace
        .steps
        .iter()
        .filter(|s| s.epsilon <= 1e-2)
        .collect();
    let stagnates = !small.is_empty() && small.iter().all(|s| s.terminal_error >= 0.09);
    let worst_small = small
        .iter()
        .map(|s| s.terminal_error)
        .fold(f64::INFINITY, f64::min);

    // Control: the attainable target must not trip the probe.
    let proper = DensitySlice::cosine(n, -0.3).unwrap();
    let control = counterexample_probe(&pinned(), grid, &m0, &proper, &cfg).unwrap();

    suite.record(
        "infeasible-target",
        stagnates && report.nonexistence_detected && !control.nonexistence_detected,
        format!(
            "{} ladder steps with eps<=1e-2, min error there {worst_small:.4} (floor 0.09), \
             probe nonexistence={}, proper-target control nonexistence={}",
            small.len(),
            report.nonexistence_detected,
            control.nonexistence_detected
        ),
    );
}

/// Long horizons: midpoint density distance shrinks exponentially with a
/// well-fitted rate that is consistent across T in {10, 20, 40}, and the
/// midpoint distances decrease strictly in T. The time resolution grows as
/// T^{3/2} so each run's second-order time bias shrinks like 1/T.
fn turnpike_and_horizon(suite: &mut Suite) -> Vec<Solution> {
    let opts = SolveOptions::default();
    let mut sols = Vec::new();
    let mut fits = Vec::new();
    for (t_h, n_t) in [(10.0, 64usize), (20.0, 179), (40.0, 505)] {
        let spec = cost_spec(64, n_t, t_h, 0.3);
        let sol = solve(&spec, &opts).unwrap();
        fits.push(turnpike_fit(&sol));
        sols.push(sol);
    }
    let mids: Vec<f64> = sols.iter().map(midpoint_distance).collect();
    let rates: Vec<f64> = fits.iter().map(|f| f.rate).collect();
    let rate_lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let rate_hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (rate_hi - rate_lo) / rate_lo;
    let fit_ok = fits.iter().all(|f| f.rate > 0.0 && f.r2 >= 0.95);
    let ok = fit_ok && spread <= 0.20 && strictly_decreasing(&mids);
    suite.record(
        "turnpike-decay",
        ok,
        format!(
            "rates {:.4}/{:.4}/{:.4} (spread {:.1}%, tol 20%), r2 {:.4}/{:.4}/{:.4} (>=0.95), \
             midpoints {:.3e}/{:.3e}/{:.3e} strictly decreasing={}",
            rates[0],
            rates[1],
            rates[2],
            100.0 * spread,
            fits[0].r2,
            fits[1].r2,
            fits[2].r2,
            mids[0],
            mids[1],
            mids[2],
            strictly_decreasing(&mids)
        ),
    );
    sols
}

/// The anchored values converge as the horizon grows: the (20, 40) gap on
/// the shared early window [0, 5] is no larger than the (10, 20) gap, and
/// the anchored midpoint mean of v approaches the equilibrium value g(1).
fn horizon_convergence(suite: &mut Suite, sols: &[Solution]) {
    let c12 = infinite_horizon_compare(&sols[0], &sols[1], 5.0).unwrap();
    let c23 = infinite_horizon_compare(&sols[1], &sols[2], 5.0).unwrap();
    let mid_means: Vec<f64> = sols
        .iter()
        .map(|s| {
            let v = s.value_anchored_at(s.plateau_rate());
            let g = v.grid();
            let mid = (g.n_t - 1) / 2;
            let mean = v.level(mid).iter().sum::<f64>() / g.n_x as f64;
            (mean - 1.0).abs()
        })
        .collect();
    let ok = c23.max_diff <= c12.max_diff && strictly_decreasing(&mid_means);
    suite.record(
        "horizon-convergence",
        ok,
        format!(
            "|v10-v20|={:.3e} >= |v20-v40|={:.3e}; anchored |mean v(T/2)-g(1)| = \
             {:.3e}/{:.3e}/{:.3e} strictly decreasing={}",
            c12.max_diff,
            c23.max_diff,
            mid_means[0],
            mid_means[1],
            mid_means[2],
            strictly_decreasing(&mid_means)
        ),
    );
}

/// The pairing gap behind uniqueness is nonnegative on 10^4 seeded random
/// state pairs for every built-in model that passes the structural
/// inequalities, vanishes only on coincident pairs, and matches a
/// hand-computed oracle on the quadratic model.
fn monotonicity(suite: &mut Suite) {
    let candidates = [
        pinned(),
        HamiltonianModel::separated_power(1.5, Coupling::Log { a: 0.7 }).unwrap(),
        HamiltonianModel::separated_power(3.0, Coupling::Power { a: 0.5, b: 1.5 }).unwrap(),
        HamiltonianModel::congestion(1.0, 0.1, Coupling::Linear { a: 1.0 }).unwrap(),
        HamiltonianModel::congestion(0.5, 0.0, Coupling::Log { a: 2.0 }).unwrap(),
    ];
    let region = CheckRegion::default();
    let mut scanned = 0usize;
    let mut ok = true;
    let mut detail = String::new();
    for model in &candidates {
        let report = model.check_assumptions(&region).unwrap();
        if !report.ok {
            detail.push_str(&format!("{} skipped (inequalities fail); ", model.describe()));
            continue;
        }
        scanned += 1;
        let scan = monotonicity_scan(model, 5.0, 1e-2, 1e2, 10_000, 42).unwrap();
        // Distinct pairs have probability one, so the sampled minimum must
        // be strictly positive; coincident pairs must give exactly zero.
        let (a, b) = scan.worst_pair;
        let coincident = (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12;
        if !(scan.min_gap > 0.0 || (scan.min_gap.abs() <= 1e-12 && coincident)) {
            ok = false;
        }
        let self_gap = monotonicity_gap(model, (1.3, 0.8), (1.3, 0.8)).unwrap();
        if self_gap.abs() > 1e-12 {
            ok = false;
        }
        detail.push_str(&format!("{} min_gap={:.3e}; ", model.describe(), scan.min_gap));
    }
    // Hand oracle on the quadratic model: H = p^2/2 - m, so the pair
    // (0,1), (1,2) gives (2*1 - 0)(1) - ((1/2-2) - (0-1))(2-1) = 2.5.
    let oracle = monotonicity_gap(&pinned(), (0.0, 1.0), (1.0, 2.0)).unwrap();
    if (oracle - 2.5).abs() > 1e-12 {
        ok = false;
        detail.push_str(&format!("hand oracle got {oracle}; "));
    }
    suite.record(
        "monotonicity-gap",
        ok && scanned >= 3,
        format!("{detail}{scanned} models scanned, 10000 pairs each, seed 42"),
    );
}

/// For the quadratic model's long run, the square integral of the density is
/// nonincreasing in time to within 1e-6 of its scale.
fn square_density_decrease(suite: &mut Suite, long_run: &Solution) {
    let series = integral_series(&long_run.m, |v| v * v);
    let scale = series.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let worst = series
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    suite.record(
        "square-density-decrease",
        worst <= 1e-6 * scale,
        format!("worst increase {worst:+.2e} over T=10, tol {:.1e}", 1e-6 * scale),
    );
}

/// Nearly vanishing initial data: regularizing by delta in {1e-2, 1e-3,
/// 1e-4} leaves the interior density (middle half of the horizon) above a
/// floor that moves by at most a factor 2 across the ladder.
fn degenerate_interior_positivity(suite: &mut Suite) {
    let n = 64;
    let spec = ProblemSpec {
        model: pinned(),
        grid: GridSpec::new(n, n, 1.0).unwrap(),
        initial_density: DensitySlice::vanishing(n).unwrap(),
        kind: ProblemKind::TerminalCost {
            cost: TerminalCost::Linear { a: 1.0, b: 0.0 },
        },
    };
    let ladder = solve_degenerate(&spec, &[1e-2, 1e-3, 1e-4], &SolveOptions::default()).unwrap();
    let mins: Vec<f64> = ladder.stages.iter().map(|s| s.interior_min).collect();
    let lo = mins.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ok = lo > 0.0 && hi / lo <= 2.0;
    suite.record(
        "degenerate-interior-positivity",
        ok,
        format!(
            "interior minima {:.4}/{:.4}/{:.4}, spread x{:.3} (tol x2)",
            mins[0],
            mins[1],
            mins[2],
            hi / lo
        ),
    );
}

/// Solver hygiene, four parts: the assembled Jacobian matches directional
/// finite differences to 1e-5 relative; Newton contracts quadratically from
/// a perturbed uniform start; the homotopy endpoint is independent of the
/// schedule (1, 4, or 16 stages agree to 1e-9); and repeating a seeded solve
/// and diagnosis yields byte-identical serialized reports.
fn solver_hygiene(suite: &mut Suite) {
    let clamp = ClampPolicy::default();

    // Jacobian vs centered finite differences, relative to the directional
    // derivative scale, on three model/operator combinations.
    let g8 = GridSpec::new(8, 6, 0.9).unwrap();
    let problems = vec![
        cost_spec(64, 64, 1.0, 0.3).elliptic_problem(1.0).unwrap(),
        mfg_core::EllipticProblem::new(
            HamiltonianModel::congestion(1.0, 0.1, Coupling::Linear { a: 1.0 }).unwrap(),
            g8,
            DensitySlice::cosine(8, 0.2).unwrap(),
            mfg_core::TerminalOperator::CostLaw(TerminalCost::Log { a: 1.0, b: 0.0 }),
        )
        .unwrap(),
        mfg_core::EllipticProblem::new(
            HamiltonianModel::separated_power(3.0, Coupling::Log { a: 1.0 }).unwrap(),
            g8,
            DensitySlice::uniform(8),
            mfg_core::TerminalOperator::PenalizedDensity {
                target: DensitySlice::cosine(8, 0.4).unwrap(),
                epsilon: 0.3,
            },
        )
        .unwrap(),
    ];
    let mut jac_rel = 0.0f64;
    for problem in &problems {
        let grid = problem.grid;
        let u0 = Field::from_fn(grid, |x, t| {
            1.2 - 1.1 * t + 0.05 * (2.0 * PI * x).sin() * (1.0 + 0.3 * t)
        });
        let mut jac = jacobian_matrix(&grid);
        assemble_system(problem, &u0, &clamp, &mut jac).unwrap();
        for dir in 0..3usize {
            let w = Field::from_fn(grid, |x, t| match dir {
                0 => (2.0 * PI * x).cos(),
                1 => t * t - 0.3 * t,
                _ => (2.0 * PI * x).sin() * (0.7 * t).cos(),
            });
            let h = 1e-6;
            let shift = |sign: f64| {
                Field::from_values(
                    grid,
                    u0.values()
                        .iter()
                        .zip(w.values())
                        .map(|(a, b)| a + sign * h * b)
                        .collect(),
                )
                .unwrap()
            };
            let rp = assemble_residual(problem, &shift(1.0), &clamp).unwrap();
            let rn = assemble_residual(problem, &shift(-1.0), &clamp).unwrap();
            let jw = jac.matvec(w.values()).unwrap();
            let mut worst = 0.0f64;
            let mut fd_scale = 0.0f64;
            for k in 0..grid.len() {
                let fd = (rp.residual[k] - rn.residual[k]) / (2.0 * h);
                fd_scale = fd_scale.max(fd.abs());
                worst = worst.max((jw[k] - fd).abs());
            }
            jac_rel = jac_rel.max(worst / fd_scale.max(1.0));
        }
    }

    // Quadratic contraction from a perturbed exact equilibrium: some
    // consecutive residual triple must exhibit order >= 1.8.
    let spec = cost_spec(64, 64, 1.0, 0.0);
    let problem = spec.elliptic_problem(1.0).unwrap();
    let exact = uniform_state_guess(&problem).unwrap();
    let grid = exact.grid();
    let perturbed = Field::from_fn(grid, |x, t| {
        exact.at(
            (x * grid.n_x as f64).round() as usize % grid.n_x,
            (t / grid.dt()).round() as usize,
        ) + 0.05 * (2.0 * PI * x).sin() * (1.0 + t)
    });
    let (_, rep) = newton_solve(&problem, &perturbed, &NewtonConfig::default()).unwrap();
    let hist = &rep.residual_history;
    let mut best_order = 0.0f64;
    for w in hist.windows(3) {
        if w.iter().all(|&r| (1e-12..1e-1).contains(&r)) {
            let order = (w[2] / w[1]).ln() / (w[1] / w[0]).ln();
            best_order = best_order.max(order);
        }
    }

    // Homotopy path independence: 1, 4, and 16 stages land on the same
    // solution to 1e-9.
    let spec = cost_spec(64, 64, 1.0, 0.3);
    let problem = spec.elliptic_problem(1.0).unwrap();
    let cfg = NewtonConfig::default();
    let mut finals = Vec::new();
    for k in [1usize, 4, 16] {
        let thetas: Vec<f64> = (1..=k).map(|i| i as f64 / k as f64).collect();
        let (u, _, _) = homotopy_solve_with_schedule(&problem, &cfg, &thetas).unwrap();
        finals.push(u);
    }
    let path_gap = finals[0]
        .max_abs_diff(&finals[1])
        .unwrap()
        .max(finals[1].max_abs_diff(&finals[2]).unwrap());

    // Determinism: an identical seeded run serializes to identical bytes.
    let reports: Vec<String> = (0..2)
        .map(|_| {
            let spec = planning_spec(64);
            let sol = solve(&spec, &SolveOptions::default()).unwrap();
            let diag = mfg_core::diagnose(&spec, &sol, None, 7, 256).unwrap();
            serde_json::to_string(&diag).unwrap()
        })
        .collect();
    let bytes_identical = reports[0] == reports[1];

    suite.record(
        "solver-hygiene",
        jac_rel <= 1e-5 && best_order >= 1.8 && path_gap <= 1e-9 && bytes_identical,
        format!(
            "jacobian-vs-fd rel {jac_rel:.2e} (tol 1e-5), newton contraction order \
             {best_order:.2} (>=1.8), homotopy schedule gap {path_gap:.2e} (tol 1e-9), \
             repeated report bytes identical={bytes_identical}"
        ),
    );
}

#[test]
fn acceptance() {
    let t0 = Instant::now();
    let mut suite = Suite {
        failures: Vec::new(),
    };
    uniform_equilibrium(&mut suite);
    density_bounds(&mut suite);
    displacement_convexity(&mut suite);
    penalization_rate(&mut suite);
    infeasible_target(&mut suite);
    let long_runs = turnpike_and_horizon(&mut suite);
    horizon_convergence(&mut suite, &long_runs);
    monotonicity(&mut suite);
    square_density_decrease(&mut suite, &long_runs[0]);
    degenerate_interior_positivity(&mut suite);
    solver_hygiene(&mut suite);
    println!("acceptance suite finished in {:?}", t0.elapsed());
    assert!(
        suite.failures.is_empty(),
        "{} acceptance check(s) failed:\n{}",
        suite.failures.len(),
        suite.failures.join("\n")
    );
}
