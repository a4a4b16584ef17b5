//! Block-iterative extrapolated best approximation.
//!
//! A [`Problem`] collects affine subspaces, convex sets activated through
//! class-𝔗 operators, and prescriptions `F x = p`. [`solve`] computes the
//! point of their intersection closest to the anchor `x0` by combining
//! averaged activations, extrapolation through an affine subspace of the
//! family `I′`, and the Haugazeau outer projection.

mod algorithm;
mod baselines;
mod monitor;
mod problem;
mod schedule;


pub use algorithm::{
    solve, step, ControlConfig, IterationRecord, RelaxationRule, SolveTrace, Solver, Status,
    StepDetail, WeightRule, DEGENERATE_Y,
};
pub use baselines::{haugazeau_periodic, pierra_parallel, youla_iteration};
pub use monitor::TrajectoryMonitor;
pub use problem::{
    fixed_point_activation, ActivationFactory, AffineSelector, Constraint, ConstraintKind, Problem,
};
pub use schedule::{schedule_round_robin, RoundRobin, ScheduleSpec};
