//! The quasilinear elliptic reformulation on the space-time cylinder.
//!
//! With an admissible model (`H_m < 0`), the density is a function of the
//! gradient of the value function: `m = H^{-1}(u_x, u_t)`, inverting
//! `H(u_x, m) = u_t` in the density slot. Substituting into the coupled
//! system collapses it to a single quasilinear equation
//!
//! ```text
//!   Q u := -( a_xx u_xx + 2 a_xt u_xt + u_tt ) = 0,
//!   a_xx = H_p^2 + m H_p H_mp - m H_m H_pp,
//!   a_xt = -( H_p + m H_mp / 2 ),
//! ```
//!
//! whose coefficient matrix has determinant
//! `-(m^2 H_mp^2 / 4 + m H_m H_pp) > 0` — the ellipticity margin checked by
//! the model layer. The interior equation satisfies the algebraic identity
//! `Q u = -H_m (m_t - (m H_p)_x)`, so a vanishing residual is the transport
//! equation in disguise.
//!
//! Boundary rows replace the interior equation with oblique operators:
//!
//! * initial row (`t = 0`): `-u_t + H(u_x, m0(x)) = 0` pins the density;
//! * terminal row, cost form: `u_t - H(u_x, g^{-1}(u)) = 0` encodes
//!   `u(T) = g(m(T))`;
//! * terminal row, penalized form: `u_t - H(u_x, eps u + mT(x)) = 0`
//!   relaxes the planning constraint `m(T) = mT` with stiffness `1/eps`.
//!
//! Both operators move with unit speed in the inward time direction, so the
//! obliqueness margin is identically 1.
//!
//! Assembly produces the residual and, on request, the exact Jacobian in
//! banded form (bandwidth `2 n_x` on the time-major ordering). The density
//! inversion is clamped to a configurable box; clamped nodes freeze the
//! density derivative, keeping the Jacobian consistent with the clamped
//! residual.

use thiserror::Error;

use crate::grid::{DensitySlice, Field, GridError, GridSpec};
use crate::hamiltonian::{HamiltonianModel, ModelError, TerminalCost};
use crate::linalg::BandedMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("density data has {got} nodes but the grid has n_x = {want}")]
    ShapeMismatch { got: usize, want: usize },
    #[error("penalization parameter must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error(
        "density clamping hit {count} of {nodes} nodes ({percent:.1}%), above the {limit:.1}% limit"
    )]
    ClampOverflow {
        count: usize,
        nodes: usize,
        percent: f64,
        limit: f64,
    },
}

/// Box constraints for the density inversion, with the overflow threshold
/// above which a solve is considered off the admissible branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampPolicy {
    pub m_floor: f64,
    pub m_ceil: f64,
    /// Maximum tolerated fraction of clamped nodes in an accepted iterate.
    pub max_fraction: f64,
}

impl Default for ClampPolicy {
    fn default() -> Self {
        Self {
            m_floor: 1e-8,
            m_ceil: 1e8,
            max_fraction: 0.25,
        }
    }
}

impl ClampPolicy {
    /// Clamps a recovered density; returns the value and whether it moved.
    fn apply(&self, m: f64) -> (f64, bool) {
        if m < self.m_floor {
            (self.m_floor, true)
        } else if m > self.m_ceil {
            (self.m_ceil, true)
        } else {
            (m, false)
        }
    }
}

/// Terminal boundary operator.
#[derive(Debug, Clone)]
pub enum TerminalOperator {
    /// `u(T) = g(m(T))` through a strictly increasing cost law.
    CostLaw(TerminalCost),
    /// Penalized density target: the terminal density is forced toward
    /// `target` with stiffness `1/epsilon` (the effective cost law is
    /// `g_eps(m) = (m - target(x)) / eps`).
    PenalizedDensity { target: DensitySlice, epsilon: f64 },
}

/// A fully specified boundary-value problem for the quasilinear operator.
#[derive(Debug, Clone)]
pub struct EllipticProblem {
    pub model: HamiltonianModel,
    pub grid: GridSpec,
    pub initial_density: DensitySlice,
    pub terminal: TerminalOperator,
}

impl EllipticProblem {
    pub fn new(
        model: HamiltonianModel,
        grid: GridSpec,
        initial_density: DensitySlice,
        terminal: TerminalOperator,
    ) -> Result<Self, EllipticError> {
        if initial_density.n_x() != grid.n_x {
            return Err(EllipticError::ShapeMismatch {
                got: initial_density.n_x(),
                want: grid.n_x,
            });
        }
        match &terminal {
            TerminalOperator::CostLaw(g) => g.validate()?,
            TerminalOperator::PenalizedDensity { target, epsilon } => {
                if target.n_x() != grid.n_x {
                    return Err(EllipticError::ShapeMismatch {
                        got: target.n_x(),
                        want: grid.n_x,
                    });
                }
                if !(epsilon.is_finite() && *epsilon > 0.0) {
                    return Err(EllipticError::BadEpsilon(*epsilon));
                }
            }
        }
        Ok(Self {
            model,
            grid,
            initial_density,
            terminal,
        })
    }

    /// Replaces the penalization parameter (continuation step).
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, EllipticError> {
        match &self.terminal {
            TerminalOperator::PenalizedDensity { target, .. } => Self::new(
                self.model.clone(),
                self.grid,
                self.initial_density.clone(),
                TerminalOperator::PenalizedDensity {
                    target: target.clone(),
                    epsilon,
                },
            ),
            TerminalOperator::CostLaw(_) => Ok(self.clone()),
        }
    }

    /// Terminal density `m_hat(z)` and its derivative in `z = u(x, T)`,
    /// clamped to the policy box (clamped nodes have zero derivative).
    fn terminal_density(
        &self,
        z: f64,
        i: usize,
        clamp: &ClampPolicy,
    ) -> Result<(f64, f64, bool), EllipticError> {
        match &self.terminal {
            TerminalOperator::CostLaw(g) => match g.inverse(z) {
                Ok(m) => {
                    let (mc, clamped) = clamp.apply(m);
                    let dmdz = if clamped { 0.0 } else { 1.0 / g.slope(mc)? };
                    Ok((mc, dmdz, clamped))
                }
                Err(ModelError::OutOfRange { .. }) => {
                    // Pick the side of the box by comparing against the cost
                    // of the floor density (g is increasing).
                    let at_floor = g.value(clamp.m_floor)?;
                    if z <= at_floor {
                        Ok((clamp.m_floor, 0.0, true))
                    } else {
                        Ok((clamp.m_ceil, 0.0, true))
                    }
                }
                Err(e) => Err(e.into()),
            },
            TerminalOperator::PenalizedDensity { target, epsilon } => {
                let raw = epsilon * z + target.value(i);
                let (m, clamped) = clamp.apply(raw);
                let dmdz = if clamped { 0.0 } else { *epsilon };
                Ok((m, dmdz, clamped))
            }
        }
    }
}

/// Inverts `H(p, m) = s` for the density and clamps to the policy box.
/// When no positive root exists the side is chosen by monotonicity: `H`
/// decreases in `m`, so `s` above the whole range clamps to the floor and
/// `s` below it clamps to the ceiling.
pub fn recover_density_node(
    model: &HamiltonianModel,
    p: f64,
    s: f64,
    clamp: &ClampPolicy,
) -> Result<(f64, bool), EllipticError> {
    match model.h_inverse(p, s) {
        Ok(m) => Ok(clamp.apply(m)),
        Err(ModelError::NoRoot { .. }) => {
            let at_floor = model.derivs(p, clamp.m_floor)?.h;
            if s >= at_floor {
                Ok((clamp.m_floor, true))
            } else {
                Ok((clamp.m_ceil, true))
            }
        }
        Err(e) => Err(e.into()),
    }
}

/// Recovers the full density field `m = H^{-1}(u_x, u_t)` from a value
/// field, using the same stencils as assembly (one-sided time differences on
/// the first and last rows). Returns the field and the clamped-node count.
pub fn recover_density_field(
    model: &HamiltonianModel,
    u: &Field,
    clamp: &ClampPolicy,
) -> Result<(Field, usize), EllipticError> {
    let p = u.dx();
    let s = u.dt();
    let g = u.grid();
    let mut values = Vec::with_capacity(g.len());
    let mut clamped = 0usize;
    for k in 0..g.len() {
        let (m, c) = recover_density_node(model, p.values()[k], s.values()[k], clamp)?;
        values.push(m);
        if c {
            clamped += 1;
        }
    }
    Ok((Field::from_values(g, values)?, clamped))
}

/// The result of a residual assembly.
#[derive(Debug, Clone)]
pub struct Assembled {
    /// Residual per node, time-major like fields.
    pub residual: Vec<f64>,
    /// Nodes where the density inversion (or terminal density) was clamped.
    pub clamp_count: usize,
    pub nodes: usize,
    /// Max-norm of the residual; infinite when any entry is non-finite.
    pub max_abs: f64,
    /// False when overflow produced non-finite residual entries.
    pub finite: bool,
}

impl Assembled {
    /// Converts an excessive clamp fraction into an error (applied by the
    /// solver to accepted iterates, not to line-search trials).
    pub fn enforce_clamp_limit(&self, clamp: &ClampPolicy) -> Result<(), EllipticError> {
        let frac = self.clamp_count as f64 / self.nodes as f64;
        if frac > clamp.max_fraction {
            return Err(EllipticError::ClampOverflow {
                count: self.clamp_count,
                nodes: self.nodes,
                percent: 100.0 * frac,
                limit: 100.0 * clamp.max_fraction,
            });
        }
        Ok(())
    }
}

/// Residual only.
pub fn assemble_residual(
    problem: &EllipticProblem,
    u: &Field,
    clamp: &ClampPolicy,
) -> Result<Assembled, EllipticError> {
    assemble(problem, u, clamp, None)
}

/// Residual and exact Jacobian. The matrix must have order `n_x * n_t` and
/// bandwidths `kl = ku = 2 n_x`; it is cleared before filling.
pub fn assemble_system(
    problem: &EllipticProblem,
    u: &Field,
    clamp: &ClampPolicy,
    jac: &mut BandedMatrix,
) -> Result<Assembled, EllipticError> {
    jac.clear();
    assemble(problem, u, clamp, Some(jac))
}

/// Allocates a banded matrix shaped for this problem's Jacobian.
pub fn jacobian_matrix(grid: &GridSpec) -> BandedMatrix {
    let band = 2 * grid.n_x;
    BandedMatrix::new(grid.len(), band, band).expect("grid sizes are validated")
}

fn assemble(
    problem: &EllipticProblem,
    u: &Field,
    clamp: &ClampPolicy,
    mut jac: Option<&mut BandedMatrix>,
) -> Result<Assembled, EllipticError> {
    let g = u.grid();
    if g.n_x != problem.grid.n_x
        || g.n_t != problem.grid.n_t
        || (g.horizon - problem.grid.horizon).abs() > 1e-12 * g.horizon
    {
        return Err(EllipticError::Grid(GridError::GridMismatch(format!(
            "field {}x{} (T = {}) vs problem {}x{} (T = {})",
            g.n_x, g.n_t, g.horizon, problem.grid.n_x, problem.grid.n_t, problem.grid.horizon
        ))));
    }
    let (n_x, n_t) = (g.n_x, g.n_t);
    let last = n_t - 1;
    let (dx, dt) = (g.dx(), g.dt());
    let inv2dx = 1.0 / (2.0 * dx);
    let inv2dt = 1.0 / (2.0 * dt);
    let invdx2 = 1.0 / (dx * dx);
    let invdt2 = 1.0 / (dt * dt);
    let inv4dxdt = inv2dx * inv2dt * 2.0 * 2.0 / 4.0; // = 1 / (4 dx dt)

    let mut residual = vec![0.0; g.len()];
    let mut clamp_count = 0usize;
    let mut finite = true;
    let mut max_abs = 0.0f64;
    // Scratch for one Jacobian row: (column, value) pairs.
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(16);

    for j in 0..n_t {
        for i in 0..n_x {
            let r = g.idx(i, j);
            entries.clear();
            let ip = if i + 1 == n_x { 0 } else { i + 1 };
            let im = if i == 0 { n_x - 1 } else { i - 1 };
            let p = (u.at(ip, j) - u.at(im, j)) * inv2dx;

            let value = if j == 0 {
                // Initial row: -u_t + H(u_x, m0). One-sided time stencil.
                let s = (-3.0 * u.at(i, 0) + 4.0 * u.at(i, 1) - u.at(i, 2)) * inv2dt;
                if !(p.is_finite() && s.is_finite()) {
                    finite = false;
                    f64::NAN
                } else {
                    let t = problem.model.derivs(p, self_density(problem, i))?;
                    if jac.is_some() {
                        entries.push((g.idx(i, 0), 3.0 * inv2dt));
                        entries.push((g.idx(i, 1), -4.0 * inv2dt));
                        entries.push((g.idx(i, 2), inv2dt));
                        entries.push((g.idx(ip, 0), t.hp * inv2dx));
                        entries.push((g.idx(im, 0), -t.hp * inv2dx));
                    }
                    -s + t.h
                }
            } else if j == last {
                // Terminal row: +u_t - H(u_x, m_hat(u)).
                let s = (3.0 * u.at(i, last) - 4.0 * u.at(i, last - 1) + u.at(i, last - 2))
                    * inv2dt;
                let z = u.at(i, last);
                if !(p.is_finite() && s.is_finite()) {
                    finite = false;
                    f64::NAN
                } else {
                    let (m_hat, dmdz, clamped) = problem.terminal_density(z, i, clamp)?;
                    if clamped {
                        clamp_count += 1;
                    }
                    let t = problem.model.derivs(p, m_hat)?;
                    if jac.is_some() {
                        entries.push((g.idx(i, last), 3.0 * inv2dt - t.hm * dmdz));
                        entries.push((g.idx(i, last - 1), -4.0 * inv2dt));
                        entries.push((g.idx(i, last - 2), inv2dt));
                        entries.push((g.idx(ip, last), -t.hp * inv2dx));
                        entries.push((g.idx(im, last), t.hp * inv2dx));
                    }
                    s - t.h
                }
            } else {
                // Interior row: the quasilinear operator.
                let s = (u.at(i, j + 1) - u.at(i, j - 1)) * inv2dt;
                let uxx = (u.at(ip, j) - 2.0 * u.at(i, j) + u.at(im, j)) * invdx2;
                let utt = (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) * invdt2;
                let uxt = (u.at(ip, j + 1) - u.at(im, j + 1) - u.at(ip, j - 1)
                    + u.at(im, j - 1))
                    * inv4dxdt;
                if !(p.is_finite() && s.is_finite() && uxx.is_finite() && utt.is_finite()) {
                    finite = false;
                    f64::NAN
                } else {
                    let (m, clamped) = recover_density_node(&problem.model, p, s, clamp)?;
                    if clamped {
                        clamp_count += 1;
                    }
                    let t = problem.model.derivs(p, m)?;
                    let a_xx = t.a_xx(m);
                    let a_xt = t.a_xt(m);
                    if jac.is_some() {
                        // Density sensitivities vanish on clamped nodes.
                        let (dm_dp, dm_ds) = if clamped {
                            (0.0, 0.0)
                        } else {
                            (-t.hp / t.hm, 1.0 / t.hm)
                        };
                        // Coefficient sensitivities.
                        let daxx_dp = 2.0 * t.hp * t.hpp + m * t.hp * t.hmpp
                            - m * t.hm * t.hppp;
                        let daxx_dm = 3.0 * t.hp * t.hmp
                            + m * t.hmp * t.hmp
                            + m * t.hp * t.hmmp
                            - t.hm * t.hpp
                            - m * t.hmm * t.hpp
                            - m * t.hm * t.hmpp;
                        let daxt_dp = -(t.hpp + 0.5 * m * t.hmpp);
                        let daxt_dm = -(1.5 * t.hmp + 0.5 * m * t.hmmp);
                        // Chain rule through p and s (m depends on both).
                        let gp = -((daxx_dp + daxx_dm * dm_dp) * uxx
                            + 2.0 * (daxt_dp + daxt_dm * dm_dp) * uxt);
                        let gs = -(daxx_dm * uxx + 2.0 * daxt_dm * uxt) * dm_ds;
                        // Second-derivative stencils.
                        entries.push((g.idx(ip, j), -a_xx * invdx2));
                        entries.push((g.idx(i, j), 2.0 * a_xx * invdx2 + 2.0 * invdt2));
                        entries.push((g.idx(im, j), -a_xx * invdx2));
                        entries.push((g.idx(i, j + 1), -invdt2));
                        entries.push((g.idx(i, j - 1), -invdt2));
                        let w = -2.0 * a_xt * inv4dxdt;
                        entries.push((g.idx(ip, j + 1), w));
                        entries.push((g.idx(im, j + 1), -w));
                        entries.push((g.idx(ip, j - 1), -w));
                        entries.push((g.idx(im, j - 1), w));
                        // First-derivative couplings through the coefficients.
                        entries.push((g.idx(ip, j), gp * inv2dx));
                        entries.push((g.idx(im, j), -gp * inv2dx));
                        entries.push((g.idx(i, j + 1), gs * inv2dt));
                        entries.push((g.idx(i, j - 1), -gs * inv2dt));
                    }
                    -(a_xx * uxx + 2.0 * a_xt * uxt + utt)
                }
            };

            residual[r] = value;
            if value.is_finite() {
                max_abs = max_abs.max(value.abs());
            } else {
                finite = false;
                max_abs = f64::INFINITY;
            }
            if let Some(m) = jac.as_deref_mut() {
                for &(c, v) in &entries {
                    m.add(r, c, v);
                }
            }
        }
    }

    Ok(Assembled {
        residual,
        clamp_count,
        nodes: g.len(),
        max_abs,
        finite,
    })
}

fn self_density(problem: &EllipticProblem, i: usize) -> f64 {
    problem.initial_density.value(i)
}

/// The obliqueness margin of the boundary operators: both move with unit
/// speed in the inward time direction (`-B_s nu = 1` with `nu` the inward
/// normal), independent of the iterate, the model, and the penalization.
pub fn obliqueness_margin(_problem: &EllipticProblem) -> f64 {
    1.0
}
