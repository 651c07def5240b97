//! Solver and diagnostics for one-dimensional local first-order mean field
//! games on the periodic unit interval.
//!
//! The coupled value/density system is reformulated as a single quasilinear
//! elliptic equation for the value function on the space-time cylinder, with
//! oblique boundary operators encoding the initial density and either a
//! terminal cost law or a (penalized) terminal density. A damped Newton
//! method with an exact banded Jacobian solves the discretized equation;
//! homotopy in the initial density and continuation in the penalty parameter
//! extend its reach. The density is recovered pointwise from the value
//! gradient, and diagnostics measure the structural properties the theory
//! predicts: entropy convexity, density bounds, penalization rates, turnpike
//! decay, and non-existence for inadmissible planning data.
//!
//! Module map:
//!
//! * [`grid`] — grids, fields, stencils, quadrature, CSV interchange.
//! * [`hamiltonian`] — model families, derivative tables, inverses,
//!   assumption checks.
//! * [`linalg`] — banded LU with partial pivoting.
//! * [`elliptic`] — residual/Jacobian assembly and boundary operators.
//! * [`solver`] — damped Newton, homotopy, penalization continuation.
//! * [`pipeline`] — problem specs, end-to-end solves, verification.
//! * [`diagnostics`] — structural measurements and probes.

pub mod diagnostics;
pub mod elliptic;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod pipeline;
pub mod solver;

pub use elliptic::{ClampPolicy, EllipticError, EllipticProblem, TerminalOperator};
pub use grid::{field_from_csv, field_to_csv, DensitySlice, Field, GridError, GridSpec};
pub use hamiltonian::{
    AssumptionReport, CheckRegion, Coupling, CustomModel, DerivOrder, DerivTable,
    HamiltonianModel, ModelError, TerminalCost,
};
pub use linalg::{BandedLu, BandedMatrix, LinAlgError};
pub use pipeline::{
    continuity_residual, recover_density, solve, solve_degenerate, verify_solution,
    DegenerateLadder, DegenerateStage, PipelineError, ProblemKind, ProblemSpec, Solution,
    SolveMeta, SolveOptions, VerifyReport,
};
pub use solver::{
    epsilon_continuation, homotopy_solve, homotopy_solve_with_schedule, newton_solve,
    uniform_state_guess, ContinuationConfig, ContinuationStep, ContinuationTrace, HomotopyTrace,
    NewtonConfig, SolveReport, SolverError, StopReason,
};

pub use diagnostics::{
    counterexample_probe, diagnose, discrete_rate, entropy_series, infinite_horizon_compare,
    integral_series, linear_fit, linearized_rate, log_log_fit, midpoint_distance,
    min_second_difference, monotonicity_gap, monotonicity_scan, penalization_rate,
    second_differences, strictly_decreasing, turnpike_fit, turnpike_profile,
    CounterexampleReport, DiagnosticsReport, HorizonComparison, MonotonicityScan, RateFit,
    TurnpikeFit, TurnpikeSummary,
};
