//! Energy-minimizing scheduling of task graphs under a deadline and per-task
//! reliability constraints, using speed scaling and re-execution.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the usual double-precision instantiation.

pub mod error;
pub mod fork_solver;
pub mod graph;
pub mod harness;
pub mod heuristics;
pub mod model;
pub mod scalar;
pub mod schedule;
pub mod vdd;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type PlatformModel64 = model::PlatformModel<f64>;
pub type PlatformModel32 = model::PlatformModel<f32>;
pub type ExecutionPlan64 = model::ExecutionPlan<f64>;
pub type TaskGraph64 = graph::TaskGraph<f64>;
pub type TaskGraph32 = graph::TaskGraph<f32>;
pub type Schedule64 = schedule::Schedule<f64>;
pub type ScheduleMetrics64 = schedule::ScheduleMetrics<f64>;
pub type ForkSolution64 = fork_solver::ForkSolution<f64>;
pub type VddPlan64 = vdd::VddPlan<f64>;
