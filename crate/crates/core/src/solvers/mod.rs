//! Iteration drivers: quadratic sweeps with Cauchy resets, general sweeps
//! with Armijo backtracking against a sweep reference value, and the
//! adaptive Barzilai–Borwein baseline with a nonmonotone line search.

use std::fmt;

use nalgebra::DVector;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engines::Engine;

mod abb;
mod general;
mod quadratic;

pub use abb::{abb_gradient, AbbRule, AbbVariant};
pub use general::solve_general;
pub use quadratic::{cauchy_step, solve_quadratic};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("memory must be at least 1")]
    Memory,
    #[error("need 0 < beta_min < beta_max, got beta_min = {0}, beta_max = {1}")]
    StepBounds(f64, f64),
    #[error("{name} must lie in (0, 1), got {value}")]
    UnitInterval { name: &'static str, value: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    Positive { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("problem dimension mismatch: {0}")]
    Dimension(String),
    #[error("gᵀAg = {0} is not positive; the Hessian is not SPD")]
    NonPositiveCurvature(f64),
    #[error("the gradient is zero; no Cauchy step exists")]
    ZeroGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Memory parameter `m`: number of stored gradient differences.
    pub memory: usize,
    /// Relative tolerance: stop once `‖g_k‖ ≤ tol·‖g₀‖`.
    pub tol: f64,
    /// Absolute gradient tolerance; replaces `tol·‖g₀‖` when set.
    pub gtol_abs: Option<f64>,
    pub max_iter: usize,
    /// Initial stepsize; `None` means `1/‖g₀‖`.
    pub beta0: Option<f64>,
    pub beta_min: f64,
    pub beta_max: f64,
    pub c_ls: f64,
    pub sigma_ls: f64,
    /// Rank truncation tolerance for the QR, SVD and Lyapunov engines.
    pub thresh: f64,
    pub engine: Engine,
    /// Window of the nonmonotone line search in the baseline method.
    pub nonmonotone_memory: usize,
    /// Quadratic sweeps only: when false, the Cauchy reset and the stack
    /// clear on gradient-norm increase are both skipped, leaving plain sweeps.
    pub monotone_control: bool,
    /// Backtracking halvings allowed per iteration before giving up.
    pub max_backtracks: usize,
    pub record_trajectory: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            memory: 5,
            tol: 1e-6,
            gtol_abs: None,
            max_iter: 100_000,
            beta0: None,
            beta_min: 1e-30,
            beta_max: 1e30,
            c_ls: 1e-4,
            sigma_ls: 0.5,
            thresh: 1e-8,
            engine: Engine::RitzCholesky,
            nonmonotone_memory: 10,
            monotone_control: true,
            max_backtracks: 200,
            record_trajectory: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.memory < 1 || self.nonmonotone_memory < 1 {
            return Err(ConfigError::Memory);
        }
        if !(self.beta_min > 0.0 && self.beta_min < self.beta_max) {
            return Err(ConfigError::StepBounds(self.beta_min, self.beta_max));
        }
        for (name, value) in [("c_ls", self.c_ls), ("sigma_ls", self.sigma_ls)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(ConfigError::UnitInterval { name, value });
            }
        }
        let mut positive = vec![("tol", self.tol), ("thresh", self.thresh)];
        if let Some(b) = self.beta0 {
            positive.push(("beta0", b));
        }
        if let Some(g) = self.gtol_abs {
            positive.push(("gtol_abs", g));
        }
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::Positive { name, value });
            }
        }
        Ok(())
    }

    pub(crate) fn clamp(&self, beta: f64) -> f64 {
        beta.min(self.beta_max).max(self.beta_min)
    }

    pub(crate) fn threshold(&self, gnorm0: f64) -> f64 {
        self.gtol_abs.unwrap_or(self.tol * gnorm0)
    }
}

/// `max(min(1/‖g‖, 10⁵), 1)`, used whenever no positive curvature estimate
/// is available.
pub fn restart_step(gnorm: f64) -> f64 {
    (1.0 / gnorm).min(1e5).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterLimit,
    EngineFailure,
    EvaluatorFailure,
    LineSearchFailure,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::IterLimit => "iter_limit",
            RunStatus::EngineFailure => "engine_failure",
            RunStatus::EvaluatorFailure => "evaluator_failure",
            RunStatus::LineSearchFailure => "line_search_failure",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One attempted iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub iteration: usize,
    /// The stepsize finally applied (after clamping and backtracking).
    pub step: f64,
    /// Reference value the step was tested against.
    pub f_ref: f64,
    /// Objective at the trial point.
    pub f_value: f64,
    /// `‖g_k‖²` at the point the step was taken from.
    pub gnorm_sq: f64,
    /// False when the point was rejected and the iterate reset.
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    /// Every stack installed, in order, including single-step restarts.
    pub stacks: Vec<Vec<f64>>,
    /// Every accepted iterate, starting with `x₀`.
    pub iterates: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub iterations: usize,
    pub nfe: usize,
    pub nge: usize,
    pub sweeps: usize,
    pub backtracks: usize,
    pub cauchy_resets: usize,
    pub wall_time: f64,
    pub status: RunStatus,
    pub gnorm0: f64,
    pub final_gnorm: f64,
    pub final_f: f64,
    /// Hex SHA-256 over the applied stepsizes and objective values.
    pub trajectory_hash: String,
    pub x: DVector<f64>,
    pub trajectory: Option<Trajectory>,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

/// Bookkeeping shared by the three drivers.
pub(crate) struct Recorder {
    hasher: Sha256,
    trajectory: Option<Trajectory>,
}

impl Recorder {
    pub fn new(record: bool, x0: &DVector<f64>) -> Self {
        let trajectory = record.then(|| Trajectory { iterates: vec![x0.clone()], ..Default::default() });
        Self { hasher: Sha256::new(), trajectory }
    }

    pub fn step(&mut self, rec: StepRecord) {
        self.hasher.update(rec.step.to_bits().to_le_bytes());
        self.hasher.update(rec.f_value.to_bits().to_le_bytes());
        self.hasher.update([u8::from(rec.accepted)]);
        if let Some(t) = self.trajectory.as_mut() {
            t.steps.push(rec);
        }
    }

    pub fn iterate(&mut self, x: &DVector<f64>) {
        if let Some(t) = self.trajectory.as_mut() {
            t.iterates.push(x.clone());
        }
    }

    pub fn stack(&mut self, steps: &[f64]) {
        for s in steps {
            self.hasher.update(s.to_bits().to_le_bytes());
        }
        if let Some(t) = self.trajectory.as_mut() {
            t.stacks.push(steps.to_vec());
        }
    }

    pub fn finish(self, x: &DVector<f64>) -> (String, Option<Trajectory>) {
        let mut hasher = self.hasher;
        for v in x.iter() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        (hex::encode(hasher.finalize()), self.trajectory)
    }
}
