//! Uniform space-time grids on the periodic cylinder, scalar fields, finite
//! difference stencils, quadrature, and the CSV field format.
//!
//! Space is the unit torus sampled at `n_x` points with spacing `1/n_x`
//! (node `n_x` wraps to node 0). Time covers `[0, T]` with `n_t` levels
//! including both endpoints, spacing `T/(n_t-1)`. Fields are stored
//! time-major: node `(i, j)` lives at `values[j * n_x + i]`.
//!
//! All stencils are second order. Interior time rows use centered
//! differences; the first and last time rows use the shifted three-point
//! variants, which are exact on quadratics in `t`. The cross derivative is
//! the composition of the time stencil with the space stencil, which at
//! interior rows reduces to the classical four-point formula.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest accepted node count per axis; the time stencils span three levels
/// and the interior operator needs at least one interior row.
pub const MIN_NODES: usize = 4;

/// Errors from grid construction, field validation, and CSV parsing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("{axis} = {n} is below the minimum of {min} nodes")]
    TooFewNodes {
        axis: &'static str,
        n: usize,
        min: usize,
    },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("field value at node ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("value buffer has length {got}, grid needs {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("density slice must have positive total mass, got {0}")]
    NonPositiveMass(f64),
    #[error("CSV field data is malformed: {0}")]
    MalformedCsv(String),
}

/// A uniform grid on the torus-cylinder `T x [0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_x: usize,
    pub n_t: usize,
    pub horizon: f64,
}

impl GridSpec {
    pub fn new(n_x: usize, n_t: usize, horizon: f64) -> Result<Self, GridError> {
        if n_x < MIN_NODES {
            return Err(GridError::TooFewNodes {
                axis: "n_x",
                n: n_x,
                min: MIN_NODES,
            });
        }
        if n_t < MIN_NODES {
            return Err(GridError::TooFewNodes {
                axis: "n_t",
                n: n_t,
                min: MIN_NODES,
            });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(GridError::BadHorizon(horizon));
        }
        Ok(Self { n_x, n_t, horizon })
    }

    /// Spatial spacing on the unit torus.
    pub fn dx(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    /// Time spacing; both endpoints are grid levels.
    pub fn dt(&self) -> f64 {
        self.horizon / (self.n_t - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.n_x * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of node `(i, j)`, time-major.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_x && j < self.n_t);
        j * self.n_x + i
    }

    fn same_shape(&self, other: &GridSpec) -> Result<(), GridError> {
        if self.n_x != other.n_x || self.n_t != other.n_t {
            return Err(GridError::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.n_x, self.n_t, other.n_x, other.n_t
            )));
        }
        if (self.horizon - other.horizon).abs() > 1e-12 * self.horizon.max(other.horizon) {
            return Err(GridError::GridMismatch(format!(
                "horizon {} vs {}",
                self.horizon, other.horizon
            )));
        }
        Ok(())
    }
}

/// A scalar field sampled on a [`GridSpec`]; every stored entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    /// A field with a single constant value.
    pub fn constant(grid: GridSpec, value: f64) -> Self {
        assert!(value.is_finite(), "field values must be finite");
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Builds a field by evaluating `f(x, t)` at every node.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n_t {
            for i in 0..grid.n_x {
                values.push(f(grid.x(i), grid.t(j)));
            }
        }
        let field = Self { grid, values };
        field
            .validate()
            .expect("from_fn produced a non-finite value");
        field
    }

    /// Wraps a value buffer, rejecting wrong lengths and non-finite entries.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                want: grid.len(),
            });
        }
        let field = Self { grid, values };
        field.validate()?;
        Ok(field)
    }

    /// Wraps a buffer whose entries the caller has already checked.
    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        for (k, v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite {
                    i: k % self.grid.n_x,
                    j: k / self.grid.n_x,
                });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// The `j`-th time level as a contiguous slice of `n_x` values.
    pub fn level(&self, j: usize) -> &[f64] {
        let n_x = self.grid.n_x;
        &self.values[j * n_x..(j + 1) * n_x]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Max-norm of `self - other` over the whole grid.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64, GridError> {
        self.grid.same_shape(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs())))
    }

    /// Pointwise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field, GridError> {
        let field = Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        };
        field.validate()?;
        Ok(field)
    }

    /// Centered periodic first difference in `x`.
    pub fn dx(&self) -> Field {
        let g = self.grid;
        let inv2dx = 1.0 / (2.0 * g.dx());
        let mut out = vec![0.0; g.len()];
        for j in 0..g.n_t {
            let row = j * g.n_x;
            for i in 0..g.n_x {
                let ip = if i + 1 == g.n_x { 0 } else { i + 1 };
                let im = if i == 0 { g.n_x - 1 } else { i - 1 };
                out[row + i] = (self.values[row + ip] - self.values[row + im]) * inv2dx;
            }
        }
        Field::from_values_unchecked(g, out)
    }

    /// Centered periodic second difference in `x`.
    pub fn dxx(&self) -> Field {
        let g = self.grid;
        let invdx2 = 1.0 / (g.dx() * g.dx());
        let mut out = vec![0.0; g.len()];
        for j in 0..g.n_t {
            let row = j * g.n_x;
            for i in 0..g.n_x {
                let ip = if i + 1 == g.n_x { 0 } else { i + 1 };
                let im = if i == 0 { g.n_x - 1 } else { i - 1 };
                out[row + i] = (self.values[row + ip] - 2.0 * self.values[row + i]
                    + self.values[row + im])
                    * invdx2;
            }
        }
        Field::from_values_unchecked(g, out)
    }

    /// First difference in `t`: centered inside, shifted three-point at the
    /// first and last rows.
    pub fn dt(&self) -> Field {
        let g = self.grid;
        let inv2dt = 1.0 / (2.0 * g.dt());
        let n_x = g.n_x;
        let last = g.n_t - 1;
        let mut out = vec![0.0; g.len()];
        for j in 0..g.n_t {
            for i in 0..n_x {
                let v = |jj: usize| self.values[jj * n_x + i];
                out[j * n_x + i] = if j == 0 {
                    (-3.0 * v(0) + 4.0 * v(1) - v(2)) * inv2dt
                } else if j == last {
                    (3.0 * v(last) - 4.0 * v(last - 1) + v(last - 2)) * inv2dt
                } else {
                    (v(j + 1) - v(j - 1)) * inv2dt
                };
            }
        }
        Field::from_values_unchecked(g, out)
    }

    /// Second difference in `t`: centered inside, shifted three-point at the
    /// first and last rows (exact on quadratics in `t`).
    pub fn dtt(&self) -> Field {
        let g = self.grid;
        let invdt2 = 1.0 / (g.dt() * g.dt());
        let n_x = g.n_x;
        let last = g.n_t - 1;
        let mut out = vec![0.0; g.len()];
        for j in 0..g.n_t {
            for i in 0..n_x {
                let v = |jj: usize| self.values[jj * n_x + i];
                out[j * n_x + i] = if j == 0 {
                    (v(0) - 2.0 * v(1) + v(2)) * invdt2
                } else if j == last {
                    (v(last) - 2.0 * v(last - 1) + v(last - 2)) * invdt2
                } else {
                    (v(j + 1) - 2.0 * v(j) + v(j - 1)) * invdt2
                };
            }
        }
        Field::from_values_unchecked(g, out)
    }

    /// Mixed derivative, composed as `dx` applied to `dt`. At interior rows
    /// this is the four-point centered stencil; at the first and last rows it
    /// inherits the shifted time stencil.
    pub fn dxt(&self) -> Field {
        self.dt().dx()
    }

    /// Rectangle-rule integral over the torus at time level `j`.
    pub fn integrate_x(&self, j: usize) -> f64 {
        let g = self.grid;
        self.level(j).iter().sum::<f64>() * g.dx()
    }
}

/// A density profile on the torus, normalized to unit mass under the
/// rectangle rule. Entries may be signed (signed terminal targets are used to
/// probe non-existence); proper probability densities are pointwise positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySlice {
    values: Vec<f64>,
}

impl DensitySlice {
    /// Normalizes `values` to unit mass. The raw mass must be positive.
    pub fn new(values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() < MIN_NODES {
            return Err(GridError::TooFewNodes {
                axis: "n_x",
                n: values.len(),
                min: MIN_NODES,
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite { i, j: 0 });
            }
        }
        let n = values.len() as f64;
        let mass = values.iter().sum::<f64>() / n;
        if !(mass.is_finite() && mass > 1e-12) {
            return Err(GridError::NonPositiveMass(mass));
        }
        Ok(Self {
            values: values.into_iter().map(|v| v / mass).collect(),
        })
    }

    /// Samples `f(x)` on `n_x` torus nodes and normalizes.
    pub fn from_fn(n_x: usize, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let vals = (0..n_x).map(|i| f(i as f64 / n_x as f64)).collect();
        Self::new(vals)
    }

    /// The constant density 1.
    pub fn uniform(n_x: usize) -> Self {
        Self::from_fn(n_x, |_| 1.0).expect("uniform slice is valid")
    }

    /// `1 + a cos(2 pi x)`; proper for `|a| < 1`, signed for `|a| > 1`.
    pub fn cosine(n_x: usize, amplitude: f64) -> Result<Self, GridError> {
        Self::from_fn(n_x, |x| 1.0 + amplitude * (2.0 * std::f64::consts::PI * x).cos())
    }

    /// `1 - cos(2 pi x)`, nonnegative with a single zero at `x = 0`.
    pub fn vanishing(n_x: usize) -> Result<Self, GridError> {
        Self::from_fn(n_x, |x| 1.0 - (2.0 * std::f64::consts::PI * x).cos())
    }

    pub fn n_x(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every entry is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.min() > 0.0
    }

    /// Unit-mass check under the rectangle rule.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise map followed by renormalization (used for regularization
    /// shifts like `(m + delta) / (1 + delta)`).
    pub fn map_normalized(&self, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Periodic linear interpolation onto `new_n` nodes, then renormalization.
    pub fn resample(&self, new_n: usize) -> Result<Self, GridError> {
        if new_n < MIN_NODES {
            return Err(GridError::TooFewNodes {
                axis: "n_x",
                n: new_n,
                min: MIN_NODES,
            });
        }
        let n = self.values.len();
        let mut out = Vec::with_capacity(new_n);
        for k in 0..new_n {
            let pos = k as f64 / new_n as f64 * n as f64;
            let i0 = pos.floor() as usize % n;
            let i1 = (i0 + 1) % n;
            let w = pos - pos.floor();
            out.push((1.0 - w) * self.values[i0] + w * self.values[i1]);
        }
        Self::new(out)
    }
}

/// Serializes a field in the interchange format: header `x,t,value`, one row
/// per node, outer loop over time levels, inner loop over space, 17
/// significant digits.
pub fn field_to_csv(field: &Field) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(32 * g.len());
    out.push_str("x,t,value\n");
    for j in 0..g.n_t {
        for i in 0..g.n_x {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                g.x(i),
                g.t(j),
                field.at(i, j)
            ));
        }
    }
    out
}

/// Parses the CSV field format back into a [`Field`], reconstructing the grid
/// from the coordinate columns.
pub fn field_from_csv(text: &str) -> Result<Field, GridError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,t,value" => {}
        other => {
            return Err(GridError::MalformedCsv(format!(
                "expected header 'x,t,value', got {:?}",
                other.unwrap_or("<empty>")
            )))
        }
    }
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64, GridError> {
            parts
                .next()
                .ok_or_else(|| {
                    GridError::MalformedCsv(format!("line {}: missing {name}", lineno + 2))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| {
                    GridError::MalformedCsv(format!("line {}: bad {name}: {e}", lineno + 2))
                })
        };
        let x = next("x")?;
        let t = next("t")?;
        let v = next("value")?;
        if parts.next().is_some() {
            return Err(GridError::MalformedCsv(format!(
                "line {}: too many columns",
                lineno + 2
            )));
        }
        rows.push((x, t, v));
    }
    if rows.is_empty() {
        return Err(GridError::MalformedCsv("no data rows".into()));
    }
    let t0 = rows[0].1;
    let n_x = rows.iter().take_while(|r| r.1 == t0).count();
    if n_x == 0 || rows.len() % n_x != 0 {
        return Err(GridError::MalformedCsv(format!(
            "row count {} is not a multiple of the detected n_x {}",
            rows.len(),
            n_x
        )));
    }
    let n_t = rows.len() / n_x;
    let horizon = rows[rows.len() - 1].1;
    let grid = GridSpec::new(n_x, n_t, horizon)?;
    for (k, row) in rows.iter().enumerate() {
        let (i, j) = (k % n_x, k / n_x);
        if (row.0 - grid.x(i)).abs() > 1e-9 || (row.1 - grid.t(j)).abs() > 1e-9 {
            return Err(GridError::MalformedCsv(format!(
                "row {} coordinates ({}, {}) do not sit on the uniform grid",
                k, row.0, row.1
            )));
        }
    }
    Field::from_values(grid, rows.into_iter().map(|r| r.2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid(n_x: usize, n_t: usize, horizon: f64) -> GridSpec {
        GridSpec::new(n_x, n_t, horizon).unwrap()
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(matches!(
            GridSpec::new(3, 64, 1.0),
            Err(GridError::TooFewNodes { axis: "n_x", .. })
        ));
        assert!(matches!(
            GridSpec::new(64, 2, 1.0),
            Err(GridError::TooFewNodes { axis: "n_t", .. })
        ));
        assert!(matches!(GridSpec::new(64, 64, 0.0), Err(GridError::BadHorizon(_))));
        assert!(matches!(
            GridSpec::new(64, 64, f64::NAN),
            Err(GridError::BadHorizon(_))
        ));
    }

    #[test]
    fn field_rejects_non_finite_entries() {
        let g = grid(8, 8, 1.0);
        let mut vals = vec![0.0; g.len()];
        vals[17] = f64::NAN;
        assert!(matches!(
            Field::from_values(g, vals),
            Err(GridError::NonFinite { i: 1, j: 2 })
        ));
    }

    #[test]
    fn dx_on_constant_is_zero() {
        let g = grid(16, 8, 1.0);
        let f = Field::constant(g, 3.5);
        assert_eq!(f.dx().max_abs(), 0.0);
        assert_eq!(f.dxx().max_abs(), 0.0);
        assert_eq!(f.dt().max_abs(), 0.0);
        assert_eq!(f.dtt().max_abs(), 0.0);
        assert_eq!(f.dxt().max_abs(), 0.0);
    }

    #[test]
    fn dx_of_sine_matches_cosine_to_second_order() {
        // Centered differencing of sin(2 pi x) carries a relative error of
        // (2 pi dx)^2 / 6; at n_x = 64 that is about 1.6e-3.
        let g = grid(64, 4, 1.0);
        let f = Field::from_fn(g, |x, _| (2.0 * PI * x).sin());
        let d = f.dx();
        let mut worst = 0.0f64;
        for i in 0..g.n_x {
            let exact = 2.0 * PI * (2.0 * PI * g.x(i)).cos();
            worst = worst.max((d.at(i, 1) - exact).abs());
        }
        assert!(
            worst / (2.0 * PI) <= 1e-2,
            "relative error {worst} too large"
        );

        // Second-order convergence: quadruple the resolution, expect ~16x.
        let g2 = grid(256, 4, 1.0);
        let f2 = Field::from_fn(g2, |x, _| (2.0 * PI * x).sin());
        let d2 = f2.dx();
        let mut worst2 = 0.0f64;
        for i in 0..g2.n_x {
            let exact = 2.0 * PI * (2.0 * PI * g2.x(i)).cos();
            worst2 = worst2.max((d2.at(i, 1) - exact).abs());
        }
        let ratio = worst / worst2;
        assert!(
            (10.0..25.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio}"
        );
    }

    #[test]
    fn time_stencils_are_exact_on_quadratics_including_boundary_rows() {
        let g = grid(8, 16, 2.0);
        let f = Field::from_fn(g, |_, t| 1.0 + 0.5 * t + 0.25 * t * t);
        let dt = f.dt();
        let dtt = f.dtt();
        for j in 0..g.n_t {
            for i in 0..g.n_x {
                let exact = 0.5 + 0.5 * g.t(j);
                assert_relative_eq!(dt.at(i, j), exact, max_relative = 1e-12);
                assert_relative_eq!(dtt.at(i, j), 0.5, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn mixed_stencil_is_exact_on_bilinear_fields() {
        // u = sin(2 pi x) * t is linear in t, so the time stencil is exact and
        // dxt reduces to dx of sin, row-independent.
        let g = grid(32, 9, 1.5);
        let f = Field::from_fn(g, |x, t| (2.0 * PI * x).sin() * t);
        let dxt = f.dxt();
        for j in [0, 1, 4, 8] {
            for i in 0..g.n_x {
                let expected = (2.0 * PI * g.x(i)).cos() * (2.0 * PI * g.dx()).sin()
                    / (2.0 * PI * g.dx())
                    * 2.0
                    * PI;
                assert_relative_eq!(
                    dxt.at(i, j),
                    expected,
                    max_relative = 1e-11,
                    epsilon = 1e-11
                );
            }
        }
    }

    #[test]
    fn four_point_cross_stencil_at_interior_rows() {
        // At interior rows the composition dx(dt(u)) must equal the classical
        // four-point centered formula.
        let g = grid(12, 10, 1.0);
        let f = Field::from_fn(g, |x, t| (2.0 * PI * x).sin() * (1.3 * t).cos() + x * 0.0 + t);
        let dxt = f.dxt();
        let (dx2, dt2) = (2.0 * g.dx(), 2.0 * g.dt());
        for j in 1..g.n_t - 1 {
            for i in 0..g.n_x {
                let ip = (i + 1) % g.n_x;
                let im = (i + g.n_x - 1) % g.n_x;
                let four = (f.at(ip, j + 1) - f.at(im, j + 1) - f.at(ip, j - 1)
                    + f.at(im, j - 1))
                    / (dx2 * dt2);
                assert_relative_eq!(dxt.at(i, j), four, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn integrate_x_on_uniform_and_oscillatory_levels() {
        let g = grid(64, 4, 1.0);
        let one = Field::constant(g, 1.0);
        assert_relative_eq!(one.integrate_x(0), 1.0, max_relative = 1e-15);
        let osc = Field::from_fn(g, |x, _| (2.0 * PI * x).sin());
        assert!(osc.integrate_x(2).abs() <= 1e-13);
    }

    #[test]
    fn density_presets_are_normalized() {
        let u = DensitySlice::uniform(64);
        assert_relative_eq!(u.mass(), 1.0, max_relative = 1e-14);
        let c = DensitySlice::cosine(64, 0.3).unwrap();
        assert_relative_eq!(c.mass(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.min(), 0.7, max_relative = 1e-12);
        assert_relative_eq!(c.max(), 1.3, max_relative = 1e-12);
        let v = DensitySlice::vanishing(64).unwrap();
        assert_relative_eq!(v.mass(), 1.0, max_relative = 1e-14);
        assert!(v.min().abs() <= 1e-14);
        let s = DensitySlice::cosine(64, -1.1).unwrap();
        assert_relative_eq!(s.mass(), 1.0, max_relative = 1e-14);
        assert!(s.min() < 0.0, "amplitude 1.1 slice must be signed");
    }

    #[test]
    fn resample_uniform_stays_uniform_and_roundtrip_is_close() {
        let u = DensitySlice::uniform(32).resample(64).unwrap();
        assert!(u.values().iter().all(|&v| (v - 1.0).abs() <= 1e-14));

        let c = DensitySlice::cosine(64, 0.5).unwrap();
        let back = c.resample(128).unwrap().resample(64).unwrap();
        let worst = c
            .values()
            .iter()
            .zip(back.values())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(worst <= 1e-2, "refine/coarsen roundtrip error {worst}");
        assert_relative_eq!(back.mass(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn csv_roundtrip_preserves_every_bit() {
        let g = grid(5, 7, 0.7);
        let f = Field::from_fn(g, |x, t| (x * 12.34 + t * 0.987).sin() * 1e3);
        let text = field_to_csv(&f);
        let back = field_from_csv(&text).unwrap();
        assert_eq!(back.grid().n_x, 5);
        assert_eq!(back.grid().n_t, 7);
        assert!((back.grid().horizon - 0.7).abs() <= 1e-12);
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a, b, "17 significant digits must round-trip f64 exactly");
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(field_from_csv("bogus\n1,2,3\n").is_err());
        assert!(field_from_csv("x,t,value\n0.0,0.0\n").is_err());
        assert!(field_from_csv("x,t,value\n0.0,0.0,1.0,9\n").is_err());
        assert!(field_from_csv("x,t,value\n").is_err());
    }
}
