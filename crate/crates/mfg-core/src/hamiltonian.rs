//! Hamiltonian models `H(p, m)` for local first-order mean field games.
//!
//! Every model exposes a derivative table through [`HamiltonianModel::eval`]:
//! the value, the first and second partials, and the three third-order
//! partials that the exact Jacobian of the quasilinear operator needs
//! (`H_ppp`, `H_mpp`, `H_mmp`). Models are defined for momentum `p` on the
//! whole line and density `m > 0`, and the admissible ones satisfy
//!
//! * strict monotonicity in the density: `H_m < 0`,
//! * strict convexity in the momentum: `H_pp > 0`,
//! * the ellipticity margin `-(m^2 H_mp^2 / 4 + m H_m H_pp) > 0`,
//!
//! which together make the density recoverable from `(u_x, u_t)` and the
//! reformulated operator elliptic. [`HamiltonianModel::check_assumptions`]
//! samples these inequalities over a parameter box and reports margins.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Errors raised by model evaluation and the inverse maps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model evaluated outside its domain: p = {p}, m = {m} (need finite p and m > 0)")]
    DomainError { p: f64, m: f64 },
    #[error("H({p}, .) = {s} has no root with positive density: {detail}")]
    NoRoot { p: f64, s: f64, detail: String },
    #[error("terminal cost level z = {z} is outside the range of the cost law")]
    OutOfRange { z: f64 },
    #[error("invalid model parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

/// Entries of the derivative table, `d^(a+b) H / dp^a dm^b`.
///
/// The first six are the orders a well-posed model must provide for residual
/// assembly and assumption checking; the last three are third-order entries
/// consumed by the exact Jacobian of the quasilinear operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivOrder {
    H,
    Hp,
    Hm,
    Hpp,
    Hmp,
    Hmm,
    Hppp,
    Hmpp,
    Hmmp,
}

impl DerivOrder {
    /// All table entries, in a fixed order.
    pub const ALL: [DerivOrder; 9] = [
        DerivOrder::H,
        DerivOrder::Hp,
        DerivOrder::Hm,
        DerivOrder::Hpp,
        DerivOrder::Hmp,
        DerivOrder::Hmm,
        DerivOrder::Hppp,
        DerivOrder::Hmpp,
        DerivOrder::Hmmp,
    ];
}

/// The full derivative table of a model at one point `(p, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivTable {
    pub h: f64,
    pub hp: f64,
    pub hm: f64,
    pub hpp: f64,
    pub hmp: f64,
    pub hmm: f64,
    pub hppp: f64,
    pub hmpp: f64,
    pub hmmp: f64,
}

impl DerivTable {
    pub fn get(&self, order: DerivOrder) -> f64 {
        match order {
            DerivOrder::H => self.h,
            DerivOrder::Hp => self.hp,
            DerivOrder::Hm => self.hm,
            DerivOrder::Hpp => self.hpp,
            DerivOrder::Hmp => self.hmp,
            DerivOrder::Hmm => self.hmm,
            DerivOrder::Hppp => self.hppp,
            DerivOrder::Hmpp => self.hmpp,
            DerivOrder::Hmmp => self.hmmp,
        }
    }

    /// Coefficient `a_xx` of the quasilinear operator at this state.
    pub fn a_xx(&self, m: f64) -> f64 {
        self.hp * self.hp + m * self.hp * self.hmp - m * self.hm * self.hpp
    }

    /// Coefficient `a_xt` of the quasilinear operator at this state
    /// (`a_tt` is identically 1).
    pub fn a_xt(&self, m: f64) -> f64 {
        -(self.hp + 0.5 * m * self.hmp)
    }

    /// Determinant of the coefficient matrix,
    /// `a_xx - a_xt^2 = -(m^2 H_mp^2 / 4 + m H_m H_pp)`.
    pub fn det(&self, m: f64) -> f64 {
        -(0.25 * m * m * self.hmp * self.hmp + m * self.hm * self.hpp)
    }
}

/// Local coupling cost `f(m)`; enters the Hamiltonian as `H = phi(p) - f(m)`
/// for the separated family and as the congestion family's zeroth-order term.
/// All variants are strictly increasing on `m > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// `f(m) = a m`, `a > 0`.
    Linear { a: f64 },
    /// `f(m) = a ln m`, `a > 0`.
    Log { a: f64 },
    /// `f(m) = a m^b`, `a > 0`, `b > 0`.
    Power { a: f64, b: f64 },
}

impl Coupling {
    pub fn validate(&self) -> Result<(), ModelError> {
        let check_a = |a: f64| {
            if a.is_finite() && a > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name: "coupling.a",
                    value: a,
                    reason: "coupling strength must be positive",
                })
            }
        };
        match *self {
            Coupling::Linear { a } | Coupling::Log { a } => check_a(a),
            Coupling::Power { a, b } => {
                check_a(a)?;
                if b.is_finite() && b > 0.0 {
                    Ok(())
                } else {
                    Err(ModelError::InvalidParameter {
                        name: "coupling.b",
                        value: b,
                        reason: "coupling exponent must be positive",
                    })
                }
            }
        }
    }

    /// `f(m)`, `f'(m)`, `f''(m)` at a positive density.
    fn derivs(&self, m: f64) -> (f64, f64, f64) {
        match *self {
            Coupling::Linear { a } => (a * m, a, 0.0),
            Coupling::Log { a } => (a * m.ln(), a / m, -a / (m * m)),
            Coupling::Power { a, b } => {
                let f = a * m.powf(b);
                (f, a * b * m.powf(b - 1.0), a * b * (b - 1.0) * m.powf(b - 2.0))
            }
        }
    }

    /// Inverse of `f` on `m > 0`; every variant has full range except Linear
    /// and Power, whose ranges are bounded below by 0.
    fn inverse(&self, y: f64) -> Result<f64, ModelError> {
        let m = match *self {
            Coupling::Linear { a } => y / a,
            Coupling::Log { a } => {
                let e = y / a;
                if e > 700.0 {
                    return Err(ModelError::NoRoot {
                        p: f64::NAN,
                        s: y,
                        detail: "log coupling inverse overflows".into(),
                    });
                }
                e.exp()
            }
            Coupling::Power { a, b } => {
                if y <= 0.0 {
                    return Err(ModelError::NoRoot {
                        p: f64::NAN,
                        s: y,
                        detail: "power coupling only takes positive values".into(),
                    });
                }
                (y / a).powf(1.0 / b)
            }
        };
        if m.is_finite() && m > 0.0 {
            Ok(m)
        } else {
            Err(ModelError::NoRoot {
                p: f64::NAN,
                s: y,
                detail: format!("coupling inverse produced {m}"),
            })
        }
    }
}

/// Terminal cost law `g(m)`, strictly increasing on `m > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalCost {
    /// `g(m) = a m + b`, `a > 0`; range is `(b, infinity)`.
    Linear { a: f64, b: f64 },
    /// `g(m) = a ln m + b`, `a > 0`; range is the whole line.
    Log { a: f64, b: f64 },
}

impl TerminalCost {
    pub fn validate(&self) -> Result<(), ModelError> {
        let (a, b) = match *self {
            TerminalCost::Linear { a, b } | TerminalCost::Log { a, b } => (a, b),
        };
        if !(a.is_finite() && a > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "terminal.a",
                value: a,
                reason: "terminal cost slope must be positive",
            });
        }
        if !b.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "terminal.b",
                value: b,
                reason: "terminal cost offset must be finite",
            });
        }
        Ok(())
    }

    /// `g(m)` at a positive density.
    pub fn value(&self, m: f64) -> Result<f64, ModelError> {
        if !(m.is_finite() && m > 0.0) {
            return Err(ModelError::DomainError { p: 0.0, m });
        }
        Ok(match *self {
            TerminalCost::Linear { a, b } => a * m + b,
            TerminalCost::Log { a, b } => a * m.ln() + b,
        })
    }

    /// `g'(m)` at a positive density.
    pub fn slope(&self, m: f64) -> Result<f64, ModelError> {
        if !(m.is_finite() && m > 0.0) {
            return Err(ModelError::DomainError { p: 0.0, m });
        }
        Ok(match *self {
            TerminalCost::Linear { a, .. } => a,
            TerminalCost::Log { a, .. } => a / m,
        })
    }

    /// `g^{-1}(z)`; [`ModelError::OutOfRange`] when `z` has no positive
    /// preimage or the preimage overflows.
    pub fn inverse(&self, z: f64) -> Result<f64, ModelError> {
        if !z.is_finite() {
            return Err(ModelError::OutOfRange { z });
        }
        let m = match *self {
            TerminalCost::Linear { a, b } => {
                if z <= b {
                    return Err(ModelError::OutOfRange { z });
                }
                (z - b) / a
            }
            TerminalCost::Log { a, b } => {
                let e = (z - b) / a;
                if e > 700.0 {
                    return Err(ModelError::OutOfRange { z });
                }
                e.exp()
            }
        };
        if m.is_finite() && m > 0.0 {
            Ok(m)
        } else {
            Err(ModelError::OutOfRange { z })
        }
    }
}

/// A user-supplied model: a single callback producing the full derivative
/// table entry by entry, plus a display name.
#[derive(Clone)]
pub struct CustomModel {
    pub name: String,
    pub table: Arc<dyn Fn(f64, f64, DerivOrder) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomModel")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// A Hamiltonian `H(p, m)`.
#[derive(Debug, Clone)]
pub enum HamiltonianModel {
    /// `H = ((1 + p^2)^(gamma/2) - 1) / gamma - f(m)`, `gamma > 1`.
    ///
    /// At `gamma = 2` this is the quadratic model `p^2/2 - f(m)`.
    SeparatedPower { gamma: f64, coupling: Coupling },
    /// `H = p^2 / (2 (m + c0)^alpha) - f(m)`, `0 < alpha < 2`, `c0 >= 0`.
    ///
    /// Kinetic energy is damped in crowded regions; the exponent bound
    /// `alpha < 2` keeps the ellipticity margin at least `2/alpha > 1`.
    Congestion {
        alpha: f64,
        c0: f64,
        coupling: Coupling,
    },
    /// Arbitrary model through a derivative-table callback.
    Custom(CustomModel),
}

impl HamiltonianModel {
    /// The quadratic separated model `p^2/2 - f(m)`.
    pub fn quadratic(coupling: Coupling) -> Result<Self, ModelError> {
        Self::separated_power(2.0, coupling)
    }

    pub fn separated_power(gamma: f64, coupling: Coupling) -> Result<Self, ModelError> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "power exponent must exceed 1",
            });
        }
        coupling.validate()?;
        Ok(HamiltonianModel::SeparatedPower { gamma, coupling })
    }

    pub fn congestion(alpha: f64, c0: f64, coupling: Coupling) -> Result<Self, ModelError> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha < 2.0) {
            return Err(ModelError::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "congestion exponent must lie in (0, 2)",
            });
        }
        if !(c0.is_finite() && c0 >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "c0",
                value: c0,
                reason: "congestion offset must be nonnegative",
            });
        }
        coupling.validate()?;
        Ok(HamiltonianModel::Congestion {
            alpha,
            c0,
            coupling,
        })
    }

    /// Human-readable model description for reports.
    pub fn describe(&self) -> String {
        fn coupling_str(c: &Coupling) -> String {
            match *c {
                Coupling::Linear { a } => format!("linear(a={a})"),
                Coupling::Log { a } => format!("log(a={a})"),
                Coupling::Power { a, b } => format!("power(a={a}, b={b})"),
            }
        }
        match self {
            HamiltonianModel::SeparatedPower { gamma, coupling } => {
                format!("separated_power(gamma={gamma}, f={})", coupling_str(coupling))
            }
            HamiltonianModel::Congestion {
                alpha,
                c0,
                coupling,
            } => format!(
                "congestion(alpha={alpha}, c0={c0}, f={})",
                coupling_str(coupling)
            ),
            HamiltonianModel::Custom(c) => format!("custom({})", c.name),
        }
    }

    /// One entry of the derivative table at `(p, m)`.
    pub fn eval(&self, p: f64, m: f64, order: DerivOrder) -> Result<f64, ModelError> {
        Ok(self.derivs(p, m)?.get(order))
    }

    /// The full derivative table at `(p, m)`.
    pub fn derivs(&self, p: f64, m: f64) -> Result<DerivTable, ModelError> {
        if !p.is_finite() || !m.is_finite() || m <= 0.0 {
            return Err(ModelError::DomainError { p, m });
        }
        let table = match self {
            HamiltonianModel::SeparatedPower { gamma, coupling } => {
                let g = *gamma;
                let (f, f1, f2) = coupling.derivs(m);
                let q = 1.0 + p * p;
                // phi(p) = (q^(g/2) - 1) / g and its p-derivatives.
                let phi = (q.powf(0.5 * g) - 1.0) / g;
                let phi1 = p * q.powf(0.5 * g - 1.0);
                let phi2 = q.powf(0.5 * g - 2.0) * (1.0 + (g - 1.0) * p * p);
                let a = 0.5 * g - 2.0;
                let phi3 = 2.0
                    * p
                    * q.powf(a - 1.0)
                    * (a * (1.0 + (g - 1.0) * p * p) + (g - 1.0) * q);
                DerivTable {
                    h: phi - f,
                    hp: phi1,
                    hm: -f1,
                    hpp: phi2,
                    hmp: 0.0,
                    hmm: -f2,
                    hppp: phi3,
                    hmpp: 0.0,
                    hmmp: 0.0,
                }
            }
            HamiltonianModel::Congestion {
                alpha,
                c0,
                coupling,
            } => {
                let al = *alpha;
                let w = m + c0;
                let (f, f1, f2) = coupling.derivs(m);
                let wa = w.powf(-al);
                let wa1 = w.powf(-al - 1.0);
                let wa2 = w.powf(-al - 2.0);
                DerivTable {
                    h: 0.5 * p * p * wa - f,
                    hp: p * wa,
                    hm: -0.5 * al * p * p * wa1 - f1,
                    hpp: wa,
                    hmp: -al * p * wa1,
                    hmm: 0.5 * al * (al + 1.0) * p * p * wa2 - f2,
                    hppp: 0.0,
                    hmpp: -al * wa1,
                    hmmp: al * (al + 1.0) * p * wa2,
                }
            }
            HamiltonianModel::Custom(c) => DerivTable {
                h: (c.table)(p, m, DerivOrder::H),
                hp: (c.table)(p, m, DerivOrder::Hp),
                hm: (c.table)(p, m, DerivOrder::Hm),
                hpp: (c.table)(p, m, DerivOrder::Hpp),
                hmp: (c.table)(p, m, DerivOrder::Hmp),
                hmm: (c.table)(p, m, DerivOrder::Hmm),
                hppp: (c.table)(p, m, DerivOrder::Hppp),
                hmpp: (c.table)(p, m, DerivOrder::Hmpp),
                hmmp: (c.table)(p, m, DerivOrder::Hmmp),
            },
        };
        Ok(table)
    }

    /// Solves `H(p, m) = s` for the density `m > 0`.
    ///
    /// Well-defined because admissible models are strictly decreasing in `m`.
    /// Uses closed forms for the separated family and a bracketing bisection
    /// (polished by Newton steps) otherwise.
    pub fn h_inverse(&self, p: f64, s: f64) -> Result<f64, ModelError> {
        if !p.is_finite() || !s.is_finite() {
            return Err(ModelError::DomainError { p, m: f64::NAN });
        }
        match self {
            HamiltonianModel::SeparatedPower { gamma, coupling } => {
                // H = phi(p) - f(m) = s  <=>  f(m) = phi(p) - s.
                let g = *gamma;
                let phi = ((1.0 + p * p).powf(0.5 * g) - 1.0) / g;
                coupling.inverse(phi - s).map_err(|e| match e {
                    ModelError::NoRoot { detail, .. } => ModelError::NoRoot { p, s, detail },
                    other => other,
                })
            }
            _ => self.h_inverse_bisect(p, s),
        }
    }

    /// Generic inverse by bracketing + bisection + Newton polish.
    fn h_inverse_bisect(&self, p: f64, s: f64) -> Result<f64, ModelError> {
        let residual = |m: f64| -> Result<f64, ModelError> {
            Ok(self.derivs(p, m)?.h - s)
        };
        // H(p, .) is strictly decreasing, so we need residual(lo) > 0 and
        // residual(hi) < 0 to bracket the root.
        let mut lo = 1e-14;
        let mut hi = 1.0;
        let mut r_lo = residual(lo)?;
        while r_lo <= 0.0 && lo > 1e-300 {
            lo *= 1e-2;
            r_lo = residual(lo)?;
        }
        if r_lo <= 0.0 {
            return Err(ModelError::NoRoot {
                p,
                s,
                detail: format!("H(p, m) stays below s down to m = {lo:e}"),
            });
        }
        let mut r_hi = residual(hi)?;
        while r_hi >= 0.0 && hi < 1e300 {
            hi *= 2.0;
            r_hi = residual(hi)?;
        }
        if r_hi >= 0.0 {
            return Err(ModelError::NoRoot {
                p,
                s,
                detail: format!("H(p, m) stays above s up to m = {hi:e}"),
            });
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let r = residual(mid)?;
            if r > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        // A couple of Newton steps sharpen the bisection estimate to full
        // precision (H_m < 0 keeps them well-defined).
        for _ in 0..3 {
            let t = self.derivs(p, mid)?;
            let step = (t.h - s) / t.hm;
            let next = mid - step;
            if next.is_finite() && next > 0.0 {
                mid = next.clamp(lo * 0.5, hi * 2.0);
            }
        }
        Ok(mid)
    }

    /// The ergodic normalization constant `lambda = -H(0, 1)`.
    pub fn lambda_star(&self) -> Result<f64, ModelError> {
        Ok(-self.derivs(0.0, 1.0)?.h)
    }

    /// Samples the structural inequalities over a `(p, m)` box.
    pub fn check_assumptions(&self, region: &CheckRegion) -> Result<AssumptionReport, ModelError> {
        region.validate()?;
        let mut report = AssumptionReport {
            ok: true,
            samples: 0,
            min_hpp: f64::INFINITY,
            max_hm: f64::NEG_INFINITY,
            min_det: f64::INFINITY,
            min_ellipticity_ratio: f64::INFINITY,
            violations: Vec::new(),
        };
        let log_lo = region.m_min.ln();
        let log_hi = region.m_max.ln();
        for jm in 0..region.n_m {
            let frac = jm as f64 / (region.n_m - 1) as f64;
            let m = (log_lo + frac * (log_hi - log_lo)).exp();
            for jp in 0..region.n_p {
                let p = -region.p_max
                    + 2.0 * region.p_max * jp as f64 / (region.n_p - 1) as f64;
                let t = self.derivs(p, m)?;
                for (name, v) in [
                    ("H", t.h),
                    ("H_p", t.hp),
                    ("H_m", t.hm),
                    ("H_pp", t.hpp),
                    ("H_mp", t.hmp),
                    ("H_mm", t.hmm),
                ] {
                    if !v.is_finite() {
                        report.push_violation(format!(
                            "{name} is not finite at p = {p}, m = {m}"
                        ));
                    }
                }
                report.samples += 1;
                report.min_hpp = report.min_hpp.min(t.hpp);
                report.max_hm = report.max_hm.max(t.hm);
                let det = t.det(m);
                report.min_det = report.min_det.min(det);
                let cross = 0.25 * m * m * t.hmp * t.hmp;
                if cross > 0.0 {
                    report.min_ellipticity_ratio = report
                        .min_ellipticity_ratio
                        .min((-m * t.hm * t.hpp) / cross);
                }
                if t.hpp <= 0.0 {
                    report.push_violation(format!(
                        "H_pp = {} <= 0 at p = {p}, m = {m} (momentum convexity fails)",
                        t.hpp
                    ));
                }
                if t.hm >= 0.0 {
                    report.push_violation(format!(
                        "H_m = {} >= 0 at p = {p}, m = {m} (density monotonicity fails)",
                        t.hm
                    ));
                }
                if det <= 0.0 {
                    report.push_violation(format!(
                        "ellipticity determinant {det} <= 0 at p = {p}, m = {m}"
                    ));
                }
            }
        }
        Ok(report)
    }

    /// Compares the table's derivative entries against centered finite
    /// differences of lower-order entries; returns the worst relative
    /// mismatch per order. Useful for vetting [`CustomModel`] tables.
    pub fn derivative_consistency(
        &self,
        region: &CheckRegion,
    ) -> Result<Vec<(DerivOrder, f64)>, ModelError> {
        region.validate()?;
        let orders = [
            DerivOrder::Hp,
            DerivOrder::Hm,
            DerivOrder::Hpp,
            DerivOrder::Hmp,
            DerivOrder::Hmm,
            DerivOrder::Hppp,
            DerivOrder::Hmpp,
            DerivOrder::Hmmp,
        ];
        let mut worst = vec![0.0f64; orders.len()];
        let h_rel = 1e-5;
        for jm in 0..region.n_m {
            let frac = jm as f64 / (region.n_m - 1) as f64;
            let m = region.m_min * (region.m_max / region.m_min).powf(frac);
            for jp in 0..region.n_p {
                let p = -region.p_max
                    + 2.0 * region.p_max * jp as f64 / (region.n_p - 1) as f64;
                let hp = h_rel * (1.0 + p.abs());
                let hm = h_rel * m;
                if m - hm <= 0.0 {
                    continue;
                }
                let fd = |lower: DerivOrder, dp: bool| -> Result<f64, ModelError> {
                    let (a, b) = if dp {
                        (self.eval(p + hp, m, lower)?, self.eval(p - hp, m, lower)?)
                    } else {
                        (self.eval(p, m + hm, lower)?, self.eval(p, m - hm, lower)?)
                    };
                    Ok((a - b) / (2.0 * if dp { hp } else { hm }))
                };
                let checks: [(usize, DerivOrder, DerivOrder, bool); 8] = [
                    (0, DerivOrder::Hp, DerivOrder::H, true),
                    (1, DerivOrder::Hm, DerivOrder::H, false),
                    (2, DerivOrder::Hpp, DerivOrder::Hp, true),
                    (3, DerivOrder::Hmp, DerivOrder::Hp, false),
                    (4, DerivOrder::Hmm, DerivOrder::Hm, false),
                    (5, DerivOrder::Hppp, DerivOrder::Hpp, true),
                    (6, DerivOrder::Hmpp, DerivOrder::Hpp, false),
                    (7, DerivOrder::Hmmp, DerivOrder::Hmp, false),
                ];
                for (k, target, lower, dp) in checks {
                    let approx = fd(lower, dp)?;
                    let exact = self.eval(p, m, target)?;
                    let scale = 1.0 + exact.abs().max(approx.abs());
                    worst[k] = worst[k].max((approx - exact).abs() / scale);
                }
            }
        }
        Ok(orders.into_iter().zip(worst).collect())
    }
}

/// Sampling box for [`HamiltonianModel::check_assumptions`]: `p` uniform on
/// `[-p_max, p_max]`, `m` log-uniform on `[m_min, m_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckRegion {
    pub p_max: f64,
    pub m_min: f64,
    pub m_max: f64,
    pub n_p: usize,
    pub n_m: usize,
}

impl Default for CheckRegion {
    fn default() -> Self {
        Self {
            p_max: 10.0,
            m_min: 1e-3,
            m_max: 1e3,
            n_p: 33,
            n_m: 33,
        }
    }
}

impl CheckRegion {
    fn validate(&self) -> Result<(), ModelError> {
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "check.p_max",
                value: self.p_max,
                reason: "must be positive",
            });
        }
        if !(self.m_min.is_finite() && self.m_min > 0.0 && self.m_max > self.m_min) {
            return Err(ModelError::InvalidParameter {
                name: "check.m_min",
                value: self.m_min,
                reason: "need 0 < m_min < m_max",
            });
        }
        if self.n_p < 2 || self.n_m < 2 {
            return Err(ModelError::InvalidParameter {
                name: "check.n_p",
                value: self.n_p as f64,
                reason: "need at least 2 samples per axis",
            });
        }
        Ok(())
    }
}

/// Outcome of sampling the structural inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub ok: bool,
    pub samples: usize,
    /// Smallest `H_pp` seen (must stay positive).
    pub min_hpp: f64,
    /// Largest `H_m` seen (must stay negative).
    pub max_hm: f64,
    /// Smallest ellipticity determinant seen (must stay positive).
    pub min_det: f64,
    /// Smallest ratio `(-m H_m H_pp) / (m^2 H_mp^2 / 4)`; above 1 means
    /// uniformly elliptic, `inf` when the cross term vanishes identically.
    pub min_ellipticity_ratio: f64,
    pub violations: Vec<String>,
}

impl AssumptionReport {
    fn push_violation(&mut self, v: String) {
        self.ok = false;
        if self.violations.len() < 16 {
            self.violations.push(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pinned() -> HamiltonianModel {
        HamiltonianModel::quadratic(Coupling::Linear { a: 1.0 }).unwrap()
    }

    #[test]
    fn quadratic_model_table_matches_hand_values() {
        let t = pinned().derivs(0.7, 2.0).unwrap();
        assert_relative_eq!(t.h, 0.7f64 * 0.7 / 2.0 - 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.hp, 0.7, max_relative = 1e-14);
        assert_eq!(t.hm, -1.0);
        assert_eq!(t.hpp, 1.0);
        assert_eq!(t.hmp, 0.0);
        assert_eq!(t.hmm, 0.0);
        assert_eq!(t.hppp, 0.0);
        assert_eq!(t.hmpp, 0.0);
        assert_eq!(t.hmmp, 0.0);
        // Coefficients of the quasilinear operator at this state.
        assert_relative_eq!(t.a_xx(2.0), 0.49 + 2.0, max_relative = 1e-14);
        assert_relative_eq!(t.a_xt(2.0), -0.7, max_relative = 1e-14);
        assert_relative_eq!(t.det(2.0), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HamiltonianModel::separated_power(1.0, Coupling::Linear { a: 1.0 }).is_err());
        assert!(HamiltonianModel::separated_power(2.0, Coupling::Linear { a: 0.0 }).is_err());
        assert!(HamiltonianModel::congestion(2.0, 0.1, Coupling::Linear { a: 1.0 }).is_err());
        assert!(HamiltonianModel::congestion(1.0, -0.1, Coupling::Linear { a: 1.0 }).is_err());
        assert!(HamiltonianModel::congestion(1.0, 0.1, Coupling::Power { a: 1.0, b: 0.0 })
            .is_err());
        assert!(matches!(
            pinned().derivs(0.0, 0.0),
            Err(ModelError::DomainError { .. })
        ));
        assert!(matches!(
            pinned().derivs(f64::NAN, 1.0),
            Err(ModelError::DomainError { .. })
        ));
    }

    #[test]
    fn derivative_tables_match_finite_differences_for_all_families() {
        let models = [
            pinned(),
            HamiltonianModel::separated_power(1.5, Coupling::Log { a: 0.7 }).unwrap(),
            HamiltonianModel::separated_power(3.0, Coupling::Power { a: 0.5, b: 1.5 }).unwrap(),
            HamiltonianModel::congestion(1.0, 0.1, Coupling::Linear { a: 1.0 }).unwrap(),
            HamiltonianModel::congestion(0.5, 0.0, Coupling::Log { a: 2.0 }).unwrap(),
        ];
        let region = CheckRegion {
            p_max: 3.0,
            m_min: 0.2,
            m_max: 5.0,
            n_p: 7,
            n_m: 7,
        };
        for model in &models {
            for (order, err) in model.derivative_consistency(&region).unwrap() {
                assert!(
                    err <= 5e-8,
                    "{}: {:?} disagrees with finite differences by {err}",
                    model.describe(),
                    order
                );
            }
        }
    }

    #[test]
    fn h_inverse_closed_form_for_quadratic_linear_model() {
        // p^2/2 - m = s  =>  m = p^2/2 - s; at p = 1, s = -1 the root is 1.5.
        let m = pinned().h_inverse(1.0, -1.0).unwrap();
        assert_relative_eq!(m, 1.5, max_relative = 1e-14);
        // No positive root when s >= p^2/2.
        assert!(matches!(
            pinned().h_inverse(1.0, 0.5),
            Err(ModelError::NoRoot { .. })
        ));
    }

    #[test]
    fn h_inverse_closed_form_for_log_coupling() {
        // p^2/2 - a ln m = s  =>  m = exp((p^2/2 - s)/a).
        let model = HamiltonianModel::quadratic(Coupling::Log { a: 2.0 }).unwrap();
        let m = model.h_inverse(1.0, -3.0).unwrap();
        assert_relative_eq!(m, ((0.5f64 + 3.0) / 2.0).exp(), max_relative = 1e-14);
    }

    #[test]
    fn h_inverse_bisection_matches_quadratic_oracle_for_congestion() {
        // alpha = 1, c0 = 0.1, f = m, p = 1, s = 0:
        //   1 / (2 (m + 0.1)) = m  =>  2 m^2 + 0.2 m - 1 = 0
        //   =>  m = (-0.2 + sqrt(8.04)) / 4 = 0.65887233549385...
        let model =
            HamiltonianModel::congestion(1.0, 0.1, Coupling::Linear { a: 1.0 }).unwrap();
        let oracle = (-0.2 + 8.04f64.sqrt()) / 4.0;
        let m = model.h_inverse(1.0, 0.0).unwrap();
        assert_relative_eq!(m, oracle, max_relative = 1e-12);
        // The root really solves the equation.
        let h = model.derivs(1.0, m).unwrap().h;
        assert!(h.abs() <= 1e-12);
    }

    #[test]
    fn h_inverse_round_trips_across_families() {
        let models = [
            HamiltonianModel::separated_power(1.5, Coupling::Power { a: 0.5, b: 2.0 }).unwrap(),
            HamiltonianModel::congestion(1.3, 0.2, Coupling::Log { a: 1.0 }).unwrap(),
        ];
        for model in &models {
            for &m_true in &[0.05, 0.7, 1.0, 4.2, 80.0] {
                for &p in &[-2.0, 0.0, 0.3, 1.7] {
                    let s = model.derivs(p, m_true).unwrap().h;
                    let m = model.h_inverse(p, s).unwrap();
                    assert_relative_eq!(m, m_true, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn terminal_cost_inverse_and_range() {
        let lin = TerminalCost::Linear { a: 2.0, b: 1.0 };
        assert_relative_eq!(lin.value(3.0).unwrap(), 7.0, max_relative = 1e-15);
        assert_relative_eq!(lin.inverse(7.0).unwrap(), 3.0, max_relative = 1e-15);
        assert!(matches!(
            lin.inverse(1.0),
            Err(ModelError::OutOfRange { .. })
        ));
        assert!(matches!(
            lin.inverse(0.0),
            Err(ModelError::OutOfRange { .. })
        ));

        let log = TerminalCost::Log { a: 0.5, b: -1.0 };
        let m = log.inverse(0.3).unwrap();
        assert_relative_eq!(log.value(m).unwrap(), 0.3, max_relative = 1e-13);
        assert!(matches!(
            log.inverse(1e6),
            Err(ModelError::OutOfRange { .. })
        ));
    }

    #[test]
    fn lambda_star_is_coupling_at_unit_density_for_separated_models() {
        assert_relative_eq!(pinned().lambda_star().unwrap(), 1.0, max_relative = 1e-15);
        let log = HamiltonianModel::quadratic(Coupling::Log { a: 3.0 }).unwrap();
        // ln 1 = 0, so lambda = 0 for the log coupling.
        assert_relative_eq!(log.lambda_star().unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn assumption_check_accepts_admissible_models() {
        for model in [
            pinned(),
            HamiltonianModel::separated_power(4.0, Coupling::Log { a: 1.0 }).unwrap(),
            HamiltonianModel::congestion(1.5, 0.1, Coupling::Linear { a: 2.0 }).unwrap(),
        ] {
            let report = model.check_assumptions(&CheckRegion::default()).unwrap();
            assert!(report.ok, "{}: {:?}", model.describe(), report.violations);
            assert!(report.min_hpp > 0.0);
            assert!(report.max_hm < 0.0);
            assert!(report.min_det > 0.0);
        }
    }

    #[test]
    fn congestion_ellipticity_ratio_respects_the_two_over_alpha_bound() {
        let alpha = 1.5;
        let model =
            HamiltonianModel::congestion(alpha, 0.0, Coupling::Linear { a: 1.0 }).unwrap();
        let report = model.check_assumptions(&CheckRegion::default()).unwrap();
        assert!(report.ok);
        assert!(
            report.min_ellipticity_ratio >= 2.0 / alpha - 1e-9,
            "ratio {} fell below 2/alpha = {}",
            report.min_ellipticity_ratio,
            2.0 / alpha
        );
    }

    #[test]
    fn assumption_check_flags_a_concave_custom_model() {
        // H = -p^2/2 - m violates momentum convexity everywhere.
        let bad = HamiltonianModel::Custom(CustomModel {
            name: "concave".into(),
            table: Arc::new(|p, m, order| match order {
                DerivOrder::H => -0.5 * p * p - m,
                DerivOrder::Hp => -p,
                DerivOrder::Hm => -1.0,
                DerivOrder::Hpp => -1.0,
                _ => 0.0,
            }),
        });
        let report = bad.check_assumptions(&CheckRegion::default()).unwrap();
        assert!(!report.ok);
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("momentum convexity")));
    }
}
