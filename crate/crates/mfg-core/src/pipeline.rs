//! High-level problem API: describe a game, solve it, and verify the
//! solution against the coupled system it encodes.
//!
//! Two problem kinds are supported. The terminal-cost game prescribes the
//! initial density and couples the terminal value to the terminal density
//! through an increasing cost law `u(T) = g(m(T))`. The planning variant
//! prescribes both the initial and the terminal density; it is solved by
//! penalization, driving the relaxed terminal constraint toward enforcement.
//!
//! Solutions carry both unknowns: the value field `u` and the density field
//! `m = H^{-1}(u_x, u_t)` recovered from it. Verification re-derives the
//! original system: the Hamilton-Jacobi residual `-u_t + H(u_x, m)`, the
//! transport residual `m_t - (m H_p(u_x, m))_x`, mass conservation, data
//! attainment, and the extremal-density comparison against the time
//! boundaries.

use serde::Serialize;
use thiserror::Error;

use crate::elliptic::{
    assemble_residual, recover_density_field, ClampPolicy, EllipticError, EllipticProblem,
    TerminalOperator,
};
use crate::grid::{DensitySlice, Field, GridError, GridSpec};
use crate::hamiltonian::{CheckRegion, HamiltonianModel, ModelError, TerminalCost};
use crate::solver::{
    epsilon_continuation, homotopy_solve, newton_solve, ContinuationConfig, NewtonConfig,
    SolverError, StopReason,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("structural assumption failed: {0}")]
    AssumptionFailure(String),
    #[error(
        "penalization continuation stalled at epsilon = {stalled_at:e} after {steps} steps (terminal density error {last_terminal_error:e})"
    )]
    ContinuationStalled {
        stalled_at: f64,
        steps: usize,
        last_terminal_error: f64,
    },
}

/// What the game prescribes at the terminal time.
#[derive(Debug, Clone)]
pub enum ProblemKind {
    /// `u(T) = g(m(T))` through an increasing cost law.
    TerminalCost { cost: TerminalCost },
    /// `m(T) = terminal_density` (planning), enforced by penalization.
    Planning { terminal_density: DensitySlice },
}

/// A complete game description.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub model: HamiltonianModel,
    pub grid: GridSpec,
    pub initial_density: DensitySlice,
    pub kind: ProblemKind,
}

impl ProblemSpec {
    /// Structural validation: shapes, strictly positive data, and the model
    /// inequalities sampled over the default region.
    pub fn validate(&self, check_model: bool) -> Result<(), PipelineError> {
        if self.initial_density.n_x() != self.grid.n_x {
            return Err(EllipticError::ShapeMismatch {
                got: self.initial_density.n_x(),
                want: self.grid.n_x,
            }
            .into());
        }
        if !self.initial_density.is_positive() {
            return Err(PipelineError::AssumptionFailure(format!(
                "initial density must be strictly positive (min = {}); regularize degenerate data first",
                self.initial_density.min()
            )));
        }
        if let ProblemKind::Planning { terminal_density } = &self.kind {
            if terminal_density.n_x() != self.grid.n_x {
                return Err(EllipticError::ShapeMismatch {
                    got: terminal_density.n_x(),
                    want: self.grid.n_x,
                }
                .into());
            }
            if !terminal_density.is_positive() {
                return Err(PipelineError::AssumptionFailure(format!(
                    "terminal density must be strictly positive (min = {}); regularize degenerate data first",
                    terminal_density.min()
                )));
            }
        }
        if check_model {
            let report = self.model.check_assumptions(&CheckRegion::default())?;
            if !report.ok {
                return Err(PipelineError::AssumptionFailure(format!(
                    "model fails the structural inequalities: {}",
                    report.violations.join("; ")
                )));
            }
        }
        Ok(())
    }

    /// The boundary-value problem this game assembles into.
    pub fn elliptic_problem(&self, epsilon: f64) -> Result<EllipticProblem, PipelineError> {
        let terminal = match &self.kind {
            ProblemKind::TerminalCost { cost } => TerminalOperator::CostLaw(*cost),
            ProblemKind::Planning { terminal_density } => TerminalOperator::PenalizedDensity {
                target: terminal_density.clone(),
                epsilon,
            },
        };
        Ok(EllipticProblem::new(
            self.model.clone(),
            self.grid,
            self.initial_density.clone(),
            terminal,
        )?)
    }
}

/// Solve controls for both problem kinds.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub newton: NewtonConfig,
    pub continuation: ContinuationConfig,
    /// Sample the model inequalities before solving.
    pub check_model: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            newton: NewtonConfig::default(),
            continuation: ContinuationConfig::default(),
            check_model: true,
        }
    }
}

/// Summary of a penalization continuation run.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuationSummary {
    pub steps: usize,
    pub final_epsilon: f64,
    /// `max_x |m(x, T) - target(x)|` at the returned solution.
    pub terminal_error: f64,
    /// Same mismatch with its spatial mean removed. The raw error carries a
    /// fixed mass-transport offset of order `dt^2`; the centered error is
    /// what the penalty actually drives to zero.
    pub terminal_error_centered: f64,
    /// Why the continuation stopped.
    pub stop: StopReason,
}

/// Bookkeeping attached to a solution.
#[derive(Debug, Clone, Serialize)]
pub struct SolveMeta {
    /// Newton iterations of the last (or only) solve stage.
    pub newton_iterations: usize,
    /// Number of homotopy stages run (1 when the cold solve succeeded).
    pub homotopy_stages: usize,
    /// True when no homotopy ladder was needed.
    pub homotopy_direct: bool,
    pub continuation: Option<ContinuationSummary>,
    /// Clamped nodes in the final residual assembly.
    pub clamped_nodes: usize,
    /// Max-norm of the final residual.
    pub residual_norm: f64,
}

/// A solved game: the value field, the recovered density, and the ergodic
/// constant of the model.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Field,
    pub m: Field,
    /// `lambda = -H(0, 1)`, the long-horizon normalization rate.
    pub lambda: f64,
    pub meta: SolveMeta,
}

impl Solution {
    /// The shifted value `v = u - lambda (T - t)`, the quantity that settles
    /// to a constant profile in the long-horizon regime.
    pub fn shifted_value(&self) -> Field {
        self.value_anchored_at(self.lambda)
    }

    /// The growth rate the solve actually realized: the least-squares slope
    /// of the spatial mean of `u` over the middle half of the horizon. On the
    /// long-horizon plateau this equals `lambda` up to the `O(dt^2)` mass
    /// offset of the time discretization; anchoring comparisons at this rate
    /// removes the offset's secular `O(dt^2 T)` drift.
    pub fn plateau_rate(&self) -> f64 {
        let g = self.u.grid();
        let lo = g.n_t / 4;
        let hi = (3 * g.n_t) / 4;
        let mut ts = Vec::with_capacity(hi - lo);
        let mut means = Vec::with_capacity(hi - lo);
        for j in lo..hi.max(lo + 2).min(g.n_t) {
            ts.push(g.t(j));
            means.push(self.u.level(j).iter().sum::<f64>() / g.n_x as f64);
        }
        let n = ts.len() as f64;
        let tbar = ts.iter().sum::<f64>() / n;
        let ybar = means.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (t, y) in ts.iter().zip(&means) {
            num += (t - tbar) * (y - ybar);
            den += (t - tbar) * (t - tbar);
        }
        if den > 0.0 {
            -num / den
        } else {
            self.lambda
        }
    }

    /// `u - rate (T - t)` for a caller-chosen normalization rate.
    pub fn value_anchored_at(&self, rate: f64) -> Field {
        let g = self.u.grid();
        Field::from_values_unchecked(
            g,
            self.u
                .values()
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let j = k / g.n_x;
                    v - rate * (g.horizon - g.t(j))
                })
                .collect(),
        )
    }
}

/// Solves a game end to end.
pub fn solve(spec: &ProblemSpec, opts: &SolveOptions) -> Result<Solution, PipelineError> {
    spec.validate(opts.check_model)?;
    match &spec.kind {
        ProblemKind::TerminalCost { .. } => {
            let problem = spec.elliptic_problem(1.0)?;
            let (u, report, trace) = homotopy_solve(&problem, &opts.newton)?;
            let (m, clamped) = recover_density_field(&spec.model, &u, &opts.newton.clamp)?;
            let meta = SolveMeta {
                newton_iterations: report.iterations,
                homotopy_stages: trace.stages.len(),
                homotopy_direct: trace.direct,
                continuation: None,
                clamped_nodes: clamped,
                residual_norm: report.residual_norm,
            };
            Ok(Solution {
                u,
                m,
                lambda: spec.model.lambda_star()?,
                meta,
            })
        }
        ProblemKind::Planning { .. } => {
            let problem = spec.elliptic_problem(opts.continuation.epsilon_start)?;
            let (u_raw, trace) = epsilon_continuation(&problem, &opts.continuation)?;
            let last = trace
                .steps
                .last()
                .expect("continuation returns at least one step");
            if !trace.completed {
                return Err(PipelineError::ContinuationStalled {
                    stalled_at: trace.stalled_at.unwrap_or(f64::NAN),
                    steps: trace.steps.len(),
                    last_terminal_error: last.terminal_error,
                });
            }
            // The planning value is defined up to an additive constant in the
            // vanishing-penalty limit; pin it by zeroing the spatial mean at
            // the middle time level.
            let g = u_raw.grid();
            let mid = (g.n_t - 1) / 2;
            let mean = u_raw.level(mid).iter().sum::<f64>() / g.n_x as f64;
            let u = Field::from_values_unchecked(
                g,
                u_raw.values().iter().map(|v| v - mean).collect(),
            );
            let (m, clamped) = recover_density_field(&spec.model, &u, &opts.newton.clamp)?;
            // Residual of the final penalized stage at the returned iterate.
            let final_problem = spec.elliptic_problem(last.epsilon)?;
            let final_asm = assemble_residual(&final_problem, &u, &opts.newton.clamp)?;
            let meta = SolveMeta {
                newton_iterations: last.newton_iterations,
                homotopy_stages: 1,
                homotopy_direct: true,
                continuation: Some(ContinuationSummary {
                    steps: trace.steps.len(),
                    final_epsilon: last.epsilon,
                    terminal_error: last.terminal_error,
                    terminal_error_centered: last.terminal_error_centered,
                    stop: trace.stop,
                }),
                clamped_nodes: clamped,
                residual_norm: final_asm.max_abs,
            };
            Ok(Solution {
                u,
                m,
                lambda: spec.model.lambda_star()?,
                meta,
            })
        }
    }
}

/// Recovers the density field from a value field under this game's model.
pub fn recover_density(
    spec: &ProblemSpec,
    u: &Field,
    clamp: &ClampPolicy,
) -> Result<Field, PipelineError> {
    Ok(recover_density_field(&spec.model, u, clamp)?.0)
}

/// Pointwise transport residual `m_t - (m H_p(u_x, m))_x` on the cylinder,
/// using the shared stencils (one-sided in time on the first and last rows).
pub fn continuity_residual(
    model: &HamiltonianModel,
    u: &Field,
    m: &Field,
) -> Result<Field, PipelineError> {
    let g = u.grid();
    let p = u.dx();
    let mut flux = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let t = model.derivs(p.values()[k], m.values()[k])?;
        flux.push(m.values()[k] * t.hp);
    }
    let flux = Field::from_values(g, flux)?;
    let m_t = m.dt();
    let flux_x = flux.dx();
    Ok(Field::from_values_unchecked(
        g,
        m_t.values()
            .iter()
            .zip(flux_x.values())
            .map(|(a, b)| a - b)
            .collect(),
    ))
}

/// Verification measurements for a solved game. All entries are plain
/// numbers so reports serialize cleanly.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// `max |-u_t + H(u_x, m)|`; near zero by construction away from clamps.
    pub hj_residual: f64,
    /// `max |m_t - (m H_p)_x|` over interior rows.
    pub continuity_residual: f64,
    /// `max_j |int m(., t_j) dx - 1|`.
    pub mass_error: f64,
    /// `max_x |m(x, 0) - m0(x)|`.
    pub initial_match: f64,
    /// Planning only: `max_x |m(x, T) - mT(x)|`.
    pub terminal_match: Option<f64>,
    /// Planning only: the same mismatch with its spatial mean removed.
    /// The raw number floors at the `O(dt^2)` mass-transport offset of the
    /// scheme; the centered one measures how well the profile is attained.
    pub terminal_match_centered: Option<f64>,
    /// Terminal-cost only: `max_x |u(x, T) - g(m(x, T))|`.
    pub terminal_cost_match: Option<f64>,
    pub m_min: f64,
    pub m_max: f64,
    /// Smallest density on the two time-boundary rows.
    pub m_min_boundary: f64,
    /// Largest density on the two time-boundary rows.
    pub m_max_boundary: f64,
    /// How far the global extremes escape the boundary extremes
    /// (nonpositive values mean the comparison principle holds exactly).
    pub lower_bound_violation: f64,
    pub upper_bound_violation: f64,
    pub clamped_nodes: usize,
}

/// Re-derives the coupled system from a solution and measures every residual.
pub fn verify_solution(
    spec: &ProblemSpec,
    solution: &Solution,
    clamp: &ClampPolicy,
) -> Result<VerifyReport, PipelineError> {
    let g = solution.u.grid();
    let u = &solution.u;
    let m = &solution.m;

    // Hamilton-Jacobi residual from the recovered density.
    let p = u.dx();
    let s = u.dt();
    let mut hj = 0.0f64;
    for k in 0..g.len() {
        let t = spec.model.derivs(p.values()[k], m.values()[k])?;
        hj = hj.max((-s.values()[k] + t.h).abs());
    }

    // Transport residual, interior rows only (the boundary rows carry the
    // one-sided stencil truncation, which is a data statement, not a PDE
    // statement).
    let transport = continuity_residual(&spec.model, u, m)?;
    let mut cont = 0.0f64;
    for j in 1..g.n_t - 1 {
        for v in transport.level(j) {
            cont = cont.max(v.abs());
        }
    }

    let mut mass_error = 0.0f64;
    for j in 0..g.n_t {
        mass_error = mass_error.max((m.integrate_x(j) - 1.0).abs());
    }

    let mut initial_match = 0.0f64;
    for (i, v) in m.level(0).iter().enumerate() {
        initial_match = initial_match.max((v - spec.initial_density.value(i)).abs());
    }

    let (terminal_match, terminal_match_centered, terminal_cost_match) = match &spec.kind {
        ProblemKind::Planning { terminal_density } => {
            let diffs: Vec<f64> = m
                .level(g.n_t - 1)
                .iter()
                .enumerate()
                .map(|(i, v)| v - terminal_density.value(i))
                .collect();
            let raw = diffs.iter().fold(0.0f64, |a, d| a.max(d.abs()));
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let centered = diffs.iter().fold(0.0f64, |a, d| a.max((d - mean).abs()));
            (Some(raw), Some(centered), None)
        }
        ProblemKind::TerminalCost { cost } => {
            let mut e = 0.0f64;
            for (i, &mv) in m.level(g.n_t - 1).iter().enumerate() {
                e = e.max((u.at(i, g.n_t - 1) - cost.value(mv)?).abs());
            }
            (None, None, Some(e))
        }
    };

    let m_min = m.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let m_max = m
        .values()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let boundary_iter = m.level(0).iter().chain(m.level(g.n_t - 1));
    let m_min_boundary = boundary_iter
        .clone()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let m_max_boundary = boundary_iter.cloned().fold(f64::NEG_INFINITY, f64::max);

    let (_, clamped_nodes) = recover_density_field(&spec.model, u, clamp)?;

    Ok(VerifyReport {
        hj_residual: hj,
        continuity_residual: cont,
        mass_error,
        initial_match,
        terminal_match,
        terminal_match_centered,
        terminal_cost_match,
        m_min,
        m_max,
        m_min_boundary,
        m_max_boundary,
        lower_bound_violation: m_min_boundary - m_min,
        upper_bound_violation: m_max - m_max_boundary,
        clamped_nodes,
    })
}

/// One stage of the degenerate-data ladder.
#[derive(Debug, Clone, Serialize)]
pub struct DegenerateStage {
    pub delta: f64,
    pub m_min: f64,
    pub m_max: f64,
    /// Smallest density over the middle half of the horizon,
    /// `t in [T/4, 3T/4]`. Interior positivity shows up here: away from the
    /// (nearly vanishing) data rows the density lifts off by an amount that
    /// does not degrade as delta shrinks.
    pub interior_min: f64,
    pub residual_norm: f64,
    /// `max |u_delta - u_previous|` against the preceding stage.
    pub drift_from_previous: Option<f64>,
}

/// Outcome of solving a sequence of regularized problems with degenerate
/// (vanishing or merely nonnegative) data.
#[derive(Debug)]
pub struct DegenerateLadder {
    pub stages: Vec<DegenerateStage>,
    /// Solution at the smallest delta.
    pub solution: Solution,
}

/// Solves the game with data regularized as `(m + delta) / (1 + delta)` for
/// each `delta` in the given (decreasing) list, reporting per-stage bounds
/// and the drift between consecutive solutions. The data may vanish or dip
/// nonpositive; after the shift it must be strictly positive.
pub fn solve_degenerate(
    spec: &ProblemSpec,
    deltas: &[f64],
    opts: &SolveOptions,
) -> Result<DegenerateLadder, PipelineError> {
    if deltas.is_empty() {
        return Err(PipelineError::AssumptionFailure(
            "the regularization ladder needs at least one delta".into(),
        ));
    }
    let mut stages = Vec::new();
    let mut previous: Option<(f64, Solution)> = None;
    for &delta in deltas {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(PipelineError::AssumptionFailure(format!(
                "regularization delta must be positive, got {delta}"
            )));
        }
        let reg_spec = regularized_spec(spec, delta)?;
        let solution = match previous.as_ref() {
            None => solve(&reg_spec, opts)?,
            Some((prev_delta, prev)) => {
                degenerate_stage_solution(spec, *prev_delta, delta, prev, opts)?
            }
        };
        let drift = previous
            .as_ref()
            .map(|(_, prev)| solution.u.max_abs_diff(&prev.u))
            .transpose()?;
        let g = solution.m.grid();
        let mut interior_min = f64::INFINITY;
        for j in 0..g.n_t {
            let t = j as f64 * g.dt();
            if t >= 0.25 * g.horizon && t <= 0.75 * g.horizon {
                for &v in solution.m.level(j) {
                    interior_min = interior_min.min(v);
                }
            }
        }
        stages.push(DegenerateStage {
            delta,
            m_min: solution
                .m
                .values()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min),
            m_max: solution
                .m
                .values()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max),
            interior_min,
            residual_norm: solution.meta.residual_norm,
            drift_from_previous: drift,
        });
        previous = Some((delta, solution));
    }
    Ok(DegenerateLadder {
        stages,
        solution: previous.expect("at least one stage ran").1,
    })
}

/// The problem with both data slices shifted to `(m + delta) / (1 + delta)`,
/// strictly positive for any positive `delta`.
fn regularized_spec(spec: &ProblemSpec, delta: f64) -> Result<ProblemSpec, PipelineError> {
    let shift = |d: &DensitySlice| d.map_normalized(|v| (v + delta) / (1.0 + delta));
    Ok(ProblemSpec {
        model: spec.model.clone(),
        grid: spec.grid,
        initial_density: shift(&spec.initial_density)?,
        kind: match &spec.kind {
            ProblemKind::TerminalCost { cost } => ProblemKind::TerminalCost { cost: *cost },
            ProblemKind::Planning { terminal_density } => ProblemKind::Planning {
                terminal_density: shift(terminal_density)?,
            },
        },
    })
}

/// Solves one regularization stage warm, continuing in the regularization
/// parameter itself: Newton from the previous stage's value, with geometric
/// sub-steps in `delta` inserted adaptively when a jump is too large. The
/// uniform-anchored ladder inside [`solve`] walks a long way for strongly
/// degenerate data; neighbouring deltas are close, so this path is both
/// faster and more robust. Attempts fail fast (few iterations): a warm
/// Newton step either contracts quadratically within a handful of
/// iterations or not at all.
fn degenerate_stage_solution(
    spec: &ProblemSpec,
    prev_delta: f64,
    delta: f64,
    prev: &Solution,
    opts: &SolveOptions,
) -> Result<Solution, PipelineError> {
    let reg_spec = regularized_spec(spec, delta)?;
    if matches!(reg_spec.kind, ProblemKind::Planning { .. }) {
        // Penalized stages need the full continuation anyway.
        return solve(&reg_spec, opts);
    }
    let assemble = |u: Field, iterations: usize, stages: usize| -> Result<Solution, PipelineError> {
        let (m, clamped) = recover_density_field(&reg_spec.model, &u, &opts.newton.clamp)?;
        let problem = reg_spec.elliptic_problem(1.0)?;
        let asm = assemble_residual(&problem, &u, &opts.newton.clamp)?;
        Ok(Solution {
            u,
            m,
            lambda: reg_spec.model.lambda_star()?,
            meta: SolveMeta {
                newton_iterations: iterations,
                homotopy_stages: stages,
                homotopy_direct: stages == 1,
                continuation: None,
                clamped_nodes: clamped,
                residual_norm: asm.max_abs,
            },
        })
    };

    // Walk delta geometrically from the previous stage's value down to the
    // requested one. Steps are measured in decades; grow on success, halve
    // on failure. Warm contraction needs few iterations, so cap attempts
    // well below the cold budget to keep failures cheap.
    let probe_newton = NewtonConfig {
        max_iter: opts.newton.max_iter.min(15),
        ..opts.newton.clone()
    };
    let gap = (prev_delta / delta).log10();
    if !(gap.is_finite() && gap > 0.0) {
        return Err(PipelineError::AssumptionFailure(format!(
            "regularization deltas must decrease, got {prev_delta} then {delta}"
        )));
    }
    let mut u = prev.u.clone();
    let mut walked = 0.0f64;
    // Secant predictor state: the previous accepted point, in walked decades.
    let mut trail: Option<(f64, Field)> = None;
    let mut step = gap;
    let min_step = gap / 1024.0;
    let mut count = 0usize;
    let mut iterations = 0usize;
    while walked < gap {
        let next = (walked + step).min(gap);
        let cur_delta = prev_delta * 10f64.powf(-next);
        let problem = regularized_spec(spec, cur_delta)?.elliptic_problem(1.0)?;
        // Extrapolate the last two accepted iterates linearly in decades;
        // the corrector then starts inside the contraction basin even for
        // steps far larger than a cold warm-start would tolerate.
        let guess = match &trail {
            Some((s_prev, u_prev)) if walked > *s_prev => {
                let w = (next - walked) / (walked - s_prev);
                let values = u
                    .values()
                    .iter()
                    .zip(u_prev.values())
                    .map(|(cur, old)| cur + w * (cur - old))
                    .collect();
                Field::from_values_unchecked(u.grid(), values)
            }
            _ => u.clone(),
        };
        match newton_solve(&problem, &guess, &probe_newton) {
            Ok((u_next, rep)) => {
                trail = Some((walked, std::mem::replace(&mut u, u_next)));
                walked = next;
                iterations = rep.iterations;
                count += 1;
                step = (step * 1.5).min(gap);
            }
            Err(_) => {
                step *= 0.5;
                if step < min_step {
                    return Err(PipelineError::AssumptionFailure(format!(
                        "regularization continuation stalled between delta={:.3e} and \
                         delta={delta:.3e}",
                        prev_delta * 10f64.powf(-walked)
                    )));
                }
            }
        }
    }
    assemble(u, iterations, count)
}
