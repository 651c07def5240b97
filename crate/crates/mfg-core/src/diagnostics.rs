//! Structural diagnostics: quantities the theory predicts for solutions of
//! the coupled system, measured on discrete solutions.
//!
//! * Entropy convexity along the flow: `t -> int m ln m dx` has nonnegative
//!   second differences (displacement convexity of the interpolation).
//! * Turnpike behavior: the distance to the uniform ergodic state decays
//!   exponentially away from the time boundaries, at a rate predicted by the
//!   linearization around the uniform state.
//! * Penalization rate: the terminal mismatch of the relaxed planning
//!   problem scales linearly in the penalty parameter.
//! * Operator monotonicity: the pairing gap that makes solutions unique is
//!   nonnegative for admissible models.
//! * Non-existence probes: signed terminal targets make the penalized
//!   terminal error plateau at the distance to the admissible cone instead
//!   of vanishing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::{EllipticProblem, TerminalOperator};
use crate::grid::{DensitySlice, Field, GridError, GridSpec};
use crate::hamiltonian::{HamiltonianModel, ModelError};
use crate::pipeline::{verify_solution, PipelineError, ProblemSpec, Solution, VerifyReport};
use crate::solver::{epsilon_continuation, ContinuationConfig, ContinuationTrace, SolverError};

/// `int h(m) dx` per time level, rectangle rule.
pub fn integral_series(m: &Field, h: impl Fn(f64) -> f64) -> Vec<f64> {
    let g = m.grid();
    (0..g.n_t)
        .map(|j| m.level(j).iter().map(|&v| h(v)).sum::<f64>() * g.dx())
        .collect()
}

/// `int m ln m dx` per time level.
pub fn entropy_series(m: &Field) -> Vec<f64> {
    integral_series(m, |v| if v > 0.0 { v * v.ln() } else { 0.0 })
}

/// Centered second differences `(y[j-1] - 2 y[j] + y[j+1]) / dt^2`.
pub fn second_differences(series: &[f64], dt: f64) -> Vec<f64> {
    let inv = 1.0 / (dt * dt);
    series
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) * inv)
        .collect()
}

/// Smallest second difference; `+inf` when the series is too short.
pub fn min_second_difference(series: &[f64], dt: f64) -> f64 {
    second_differences(series, dt)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// True when every step strictly decreases.
pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// An ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination of the fit.
    pub r2: f64,
    pub points: usize,
}

/// Least squares `y = intercept + slope x`; `None` below two points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for k in 0..n {
        let dx = xs[k] - mx;
        let dy = ys[k] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy <= 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(RateFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: n,
    })
}

/// Fits `ln y = intercept + slope x`, skipping nonpositive `y`.
pub fn log_linear_fit(xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        if *y > 0.0 {
            fx.push(*x);
            fy.push(y.ln());
        }
    }
    linear_fit(&fx, &fy)
}

/// Fits `ln y = intercept + slope ln x`, skipping nonpositive pairs.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        if *x > 0.0 && *y > 0.0 {
            fx.push(x.ln());
            fy.push(y.ln());
        }
    }
    linear_fit(&fx, &fy)
}

/// Distance to the uniform ergodic state per time level:
/// `max_x |m - 1| + osc_x v`, with `v = u - lambda (T - t)`.
pub fn turnpike_profile(solution: &Solution) -> Vec<f64> {
    let g = solution.m.grid();
    let v = solution.shifted_value();
    (0..g.n_t)
        .map(|j| {
            let dm = solution
                .m
                .level(j)
                .iter()
                .fold(0.0f64, |a, &x| a.max((x - 1.0).abs()));
            let vs = v.level(j);
            let vmax = vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let vmin = vs.iter().cloned().fold(f64::INFINITY, f64::min);
            dm + (vmax - vmin)
        })
        .collect()
}

/// Distance to the ergodic state at the temporal midpoint (mean of the two
/// central levels when the grid has an even number of them).
pub fn midpoint_distance(solution: &Solution) -> f64 {
    let d = turnpike_profile(solution);
    let n = d.len();
    if n % 2 == 1 {
        d[n / 2]
    } else {
        0.5 * (d[n / 2 - 1] + d[n / 2])
    }
}

/// The linearized decay rate of the slowest spatial mode around the uniform
/// state: `2 pi sqrt(|H_m| H_pp)` at `(p, m) = (0, 1)`.
pub fn linearized_rate(model: &HamiltonianModel) -> Result<f64, ModelError> {
    let t = model.derivs(0.0, 1.0)?;
    Ok(2.0 * std::f64::consts::PI * ((-t.hm) * t.hpp).max(0.0).sqrt())
}

/// The rate the centered time stencil actually realizes for a continuum rate
/// `omega` at spacing `dt`: `acosh(1 + (dt omega)^2 / 2) / dt`. Approaches
/// `omega` as `dt -> 0` and overshoots it on coarse grids. Evaluated through
/// `asinh` to stay accurate when `dt omega` is tiny.
pub fn discrete_rate(omega: f64, dt: f64) -> f64 {
    // cosh(y) = 1 + d  =>  sinh(y) = sqrt(d (d + 2)).
    let d = 0.5 * (dt * omega).powi(2);
    (d * (d + 2.0)).sqrt().asinh() / dt
}

/// Exponential-decay fit of the first half of the turnpike profile.
#[derive(Debug, Clone, Serialize)]
pub struct TurnpikeFit {
    /// Fitted decay rate (positive when the profile decays).
    pub rate: f64,
    pub r2: f64,
    /// Smallest profile value in the fitted half (the numerical floor).
    pub floor: f64,
    /// True when plateau levels were trimmed from the fit window.
    pub floor_reached: bool,
    /// Number of levels used in the fit.
    pub points: usize,
    /// The full distance profile, one entry per time level.
    pub profile: Vec<f64>,
}

/// Fits `d(t) ~ C exp(-rate t)` on the decaying half of the profile,
/// trimming levels within a factor 3 of the observed floor, where
/// discretization drift dominates the signal.
pub fn turnpike_fit(solution: &Solution) -> TurnpikeFit {
    let profile = turnpike_profile(solution);
    let g = solution.m.grid();
    let mid = (profile.len() - 1) / 2;
    let left = &profile[..=mid];
    let floor = left.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = 3.0 * floor;
    let mut ts = Vec::new();
    let mut ds = Vec::new();
    for (j, &d) in left.iter().enumerate() {
        if d > threshold {
            ts.push(g.t(j));
            ds.push(d);
        }
    }
    let floor_reached = ts.len() < left.len();
    // Fall back to the whole half when trimming leaves too little signal.
    if ts.len() < 3 {
        ts = (0..left.len()).map(|j| g.t(j)).collect();
        ds = left.to_vec();
    }
    match log_linear_fit(&ts, &ds) {
        Some(fit) => TurnpikeFit {
            rate: -fit.slope,
            r2: fit.r2,
            floor,
            floor_reached,
            points: fit.points,
            profile,
        },
        None => TurnpikeFit {
            rate: 0.0,
            r2: 0.0,
            floor,
            floor_reached,
            points: 0,
            profile,
        },
    }
}

/// Penalization-rate fit: `ln(terminal error)` against `ln(epsilon)` over a
/// continuation trace, trimming the floor plateau like the turnpike fit.
/// Uses the mean-centered error — the raw mismatch carries a constant
/// `O(dt^2)` mass-drift offset that the penalty cannot remove.
pub fn penalization_rate(trace: &ContinuationTrace) -> Option<RateFit> {
    let eps: Vec<f64> = trace.steps.iter().map(|s| s.epsilon).collect();
    let err: Vec<f64> = trace
        .steps
        .iter()
        .map(|s| s.terminal_error_centered)
        .collect();
    let floor = err.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for (e, r) in eps.iter().zip(&err) {
        if *r > 3.0 * floor {
            fx.push(*e);
            fy.push(*r);
        }
    }
    if fx.len() >= 3 {
        log_log_fit(&fx, &fy)
    } else {
        log_log_fit(&eps, &err)
    }
}

/// The pairing gap whose nonnegativity makes solutions unique:
/// `(m1 Hp(p1,m1) - m0 Hp(p0,m0))(p1 - p0) - (H(p1,m1) - H(p0,m0))(m1 - m0)`.
pub fn monotonicity_gap(
    model: &HamiltonianModel,
    a: (f64, f64),
    b: (f64, f64),
) -> Result<f64, ModelError> {
    let ta = model.derivs(a.0, a.1)?;
    let tb = model.derivs(b.0, b.1)?;
    Ok((b.1 * tb.hp - a.1 * ta.hp) * (b.0 - a.0) - (tb.h - ta.h) * (b.1 - a.1))
}

/// Result of sampling the pairing gap on random state pairs.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityScan {
    pub samples: usize,
    pub min_gap: f64,
    /// The pair attaining the minimum, as `((p0, m0), (p1, m1))`.
    pub worst_pair: ((f64, f64), (f64, f64)),
}

/// Samples the gap on seeded random pairs: momenta uniform on
/// `[-p_max, p_max]`, densities log-uniform on `[m_min, m_max]`.
pub fn monotonicity_scan(
    model: &HamiltonianModel,
    p_max: f64,
    m_min: f64,
    m_max: f64,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityScan, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_ratio = (m_max / m_min).ln();
    let draw = |rng: &mut ChaCha8Rng| -> (f64, f64) {
        let p = rng.gen_range(-p_max..p_max);
        let m = m_min * (rng.gen_range(0.0..1.0) * log_ratio).exp();
        (p, m)
    };
    let mut min_gap = f64::INFINITY;
    let mut worst = ((0.0, 1.0), (0.0, 1.0));
    for _ in 0..samples {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let gap = monotonicity_gap(model, a, b)?;
        if gap < min_gap {
            min_gap = gap;
            worst = (a, b);
        }
    }
    Ok(MonotonicityScan {
        samples,
        min_gap,
        worst_pair: worst,
    })
}

/// Comparison of the anchored values of two solutions over the shared early
/// time window `[0, min(t_cap, T1/2, T2/2)]`. Requires matching spatial
/// grids; time spacings may differ, in which case both fields are sampled at
/// the coarser grid's time levels with linear interpolation in time. The
/// interpolation error is second order in the finer spacing, the same order
/// as the per-run discretization offsets the comparison measures.
#[derive(Debug, Clone, Serialize)]
pub struct HorizonComparison {
    /// `max_x |v_a - v_b|` per probe time.
    pub series: Vec<f64>,
    pub max_diff: f64,
    pub levels: usize,
}

/// Row of `v` at physical time `t`, linearly interpolated between the two
/// bracketing time levels; snaps to a level when `t` lands on one.
fn time_slice(v: &Field, t: f64) -> Vec<f64> {
    let g = v.grid();
    let s = t / g.dt();
    let j0 = (s.floor() as usize).min(g.n_t - 1);
    let w = s - j0 as f64;
    if w < 1e-9 || j0 + 1 >= g.n_t {
        v.level(j0).to_vec()
    } else if w > 1.0 - 1e-9 {
        v.level(j0 + 1).to_vec()
    } else {
        v.level(j0)
            .iter()
            .zip(v.level(j0 + 1))
            .map(|(lo, hi)| (1.0 - w) * lo + w * hi)
            .collect()
    }
}

pub fn infinite_horizon_compare(
    a: &Solution,
    b: &Solution,
    t_cap: f64,
) -> Result<HorizonComparison, PipelineError> {
    let ga = a.u.grid();
    let gb = b.u.grid();
    if ga.n_x != gb.n_x {
        return Err(GridError::GridMismatch(format!(
            "n_x {} vs {}",
            ga.n_x, gb.n_x
        ))
        .into());
    }
    let dt = ga.dt().max(gb.dt());
    let t_max = t_cap.min(0.5 * ga.horizon.min(gb.horizon));
    let levels = ((t_max / dt + 1e-9).floor() as usize + 1)
        .min(ga.n_t)
        .min(gb.n_t);
    // Anchor each run at its own realized growth rate: the continuum rate
    // differs from the discrete one by an O(dt^2) mass offset, which would
    // otherwise contribute a spurious O(dt^2 T) drift to the comparison.
    let va = a.value_anchored_at(a.plateau_rate());
    let vb = b.value_anchored_at(b.plateau_rate());
    let mut series = Vec::with_capacity(levels);
    let mut max_diff = 0.0f64;
    for j in 0..levels {
        let t = j as f64 * dt;
        let ra = time_slice(&va, t);
        let rb = time_slice(&vb, t);
        let d = ra
            .iter()
            .zip(&rb)
            .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
        series.push(d);
        max_diff = max_diff.max(d);
    }
    Ok(HorizonComparison {
        series,
        max_diff,
        levels,
    })
}

/// Outcome of driving the penalized terminal constraint toward a possibly
/// inadmissible (signed) target.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    /// True when the continuation failed outright at some penalty value.
    pub stalled: bool,
    pub stalled_at: Option<f64>,
    /// Best terminal mismatch achieved across the continuation.
    pub best_terminal_error: f64,
    /// Best mean-centered terminal mismatch; discounts the constant
    /// mass-transport offset of the time discretization.
    pub best_terminal_error_centered: f64,
    /// Distance from the target to the admissible cone:
    /// `max(0, -min_x target)`. Zero for proper densities.
    pub error_floor: f64,
    /// True when the mismatch cannot fall below (half) the cone distance or
    /// the continuation stalled: the prescribed pair has no solution.
    pub nonexistence_detected: bool,
}

/// Runs the penalization continuation against an arbitrary (possibly signed)
/// terminal target and reports whether the constraint is attainable. Proper
/// planning data goes through [`crate::pipeline::solve`]; this probe exists
/// to certify failures.
pub fn counterexample_probe(
    model: &HamiltonianModel,
    grid: GridSpec,
    initial_density: &DensitySlice,
    target: &DensitySlice,
    cfg: &ContinuationConfig,
) -> Result<CounterexampleReport, PipelineError> {
    let problem = EllipticProblem::new(
        model.clone(),
        grid,
        initial_density.clone(),
        TerminalOperator::PenalizedDensity {
            target: target.clone(),
            epsilon: cfg.epsilon_start,
        },
    )?;
    let error_floor = (-target.min()).max(0.0);
    match epsilon_continuation(&problem, cfg) {
        Ok((_, trace)) => {
            let best = trace
                .steps
                .iter()
                .map(|s| s.terminal_error)
                .fold(f64::INFINITY, f64::min);
            let best_centered = trace
                .steps
                .iter()
                .map(|s| s.terminal_error_centered)
                .fold(f64::INFINITY, f64::min);
            let unreachable = error_floor > 0.0 && best >= 0.5 * error_floor;
            Ok(CounterexampleReport {
                stalled: !trace.completed,
                stalled_at: trace.stalled_at,
                best_terminal_error: best,
                best_terminal_error_centered: best_centered,
                error_floor,
                nonexistence_detected: !trace.completed || unreachable,
            })
        }
        Err(SolverError::ContinuationFailed { epsilon, .. }) => Ok(CounterexampleReport {
            stalled: true,
            stalled_at: Some(epsilon),
            best_terminal_error: f64::INFINITY,
            best_terminal_error_centered: f64::INFINITY,
            error_floor,
            nonexistence_detected: true,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Turnpike summary inside a diagnostics report.
#[derive(Debug, Clone, Serialize)]
pub struct TurnpikeSummary {
    pub rate: f64,
    pub r2: f64,
    pub floor: f64,
    pub floor_reached: bool,
    pub midpoint_distance: f64,
    /// Linearized continuum prediction `2 pi sqrt(|H_m| H_pp)`.
    pub predicted_rate: f64,
    /// The prediction corrected for the time spacing actually used.
    pub predicted_rate_discrete: f64,
    pub profile: Vec<f64>,
}

/// One-stop structural report for a solved game.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub model: String,
    pub grid: GridSpec,
    pub lambda: f64,
    pub entropy: Vec<f64>,
    pub entropy_min_second_difference: f64,
    pub turnpike: TurnpikeSummary,
    pub monotonicity: MonotonicityScan,
    /// Penalization rate fit when a continuation trace is supplied.
    pub penalization: Option<RateFit>,
    pub verify: VerifyReport,
}

/// Assembles the full diagnostics report for a solution. The seed controls
/// the monotonicity sampling, keeping reports reproducible.
pub fn diagnose(
    spec: &ProblemSpec,
    solution: &Solution,
    trace: Option<&ContinuationTrace>,
    seed: u64,
    monotonicity_samples: usize,
) -> Result<DiagnosticsReport, PipelineError> {
    let entropy = entropy_series(&solution.m);
    let dt = solution.m.grid().dt();
    let fit = turnpike_fit(solution);
    let predicted = linearized_rate(&spec.model)?;
    let verify = verify_solution(spec, solution, &Default::default())?;
    Ok(DiagnosticsReport {
        model: spec.model.describe(),
        grid: spec.grid,
        lambda: solution.lambda,
        entropy_min_second_difference: min_second_difference(&entropy, dt),
        entropy,
        turnpike: TurnpikeSummary {
            rate: fit.rate,
            r2: fit.r2,
            floor: fit.floor,
            floor_reached: fit.floor_reached,
            midpoint_distance: midpoint_distance(solution),
            predicted_rate: predicted,
            predicted_rate_discrete: discrete_rate(predicted, dt),
            profile: fit.profile,
        },
        monotonicity: monotonicity_scan(&spec.model, 5.0, 1e-2, 1e2, monotonicity_samples, seed)?,
        penalization: trace.and_then(penalization_rate),
        verify,
    })
}
