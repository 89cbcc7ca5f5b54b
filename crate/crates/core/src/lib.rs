//! Limited-memory steepest descent.
//!
//! Gradient methods whose stepsizes are reciprocals of Ritz-like values
//! extracted from the last few gradients. [`engines`] turns a
//! [`history::SweepHistory`] into a stack of stepsizes, [`solvers`] drives the
//! sweeps, and [`problems`] supplies test objectives.

pub mod dense;
pub mod engines;
pub mod history;
pub mod problems;
pub mod solvers;

pub use engines::{Engine, EngineError, LyapunovHandler, StepStack};
pub use history::SweepHistory;
pub use problems::{NonlinearProblem, QuadraticProblem};
pub use solvers::{abb_gradient, solve_general, solve_quadratic, AbbVariant, RunReport, RunStatus, SolverConfig};
