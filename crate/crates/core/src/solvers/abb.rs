use std::collections::VecDeque;
use std::time::Instant;

use super::{restart_step, Recorder, RunReport, RunStatus, SolverConfig, SolverError, StepRecord};
use crate::problems::NonlinearProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbbVariant {
    /// Fixed switching threshold `η = 0.8`.
    Min,
    /// Adaptive threshold starting at `η₀ = 0.5`.
    Bon,
}

impl AbbVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            AbbVariant::Min => "abb-min",
            AbbVariant::Bon => "abb-bon",
        }
    }
}

/// The adaptive BB stepsize rule: the smallest recent BB2 step when BB2 is
/// well below BB1, otherwise BB1.
#[derive(Debug, Clone)]
pub struct AbbRule {
    variant: AbbVariant,
    memory: usize,
    eta: f64,
    bb2: VecDeque<f64>,
}

impl AbbRule {
    /// `memory` is the number of past BB2 steps considered besides the current one.
    pub fn new(variant: AbbVariant, memory: usize) -> Self {
        let eta = match variant {
            AbbVariant::Min => 0.8,
            AbbVariant::Bon => 0.5,
        };
        Self { variant, memory, eta, bb2: VecDeque::with_capacity(memory + 1) }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Next stepsize from the current BB1 and BB2 stepsizes.
    pub fn step(&mut self, bb1: f64, bb2: f64) -> f64 {
        if self.bb2.len() == self.memory + 1 {
            self.bb2.pop_front();
        }
        self.bb2.push_back(bb2);
        let switch = bb2 < self.eta * bb1;
        if self.variant == AbbVariant::Bon {
            self.eta *= if switch { 0.9 } else { 1.1 };
        }
        if switch {
            self.bb2.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            bb1
        }
    }
}

/// Gradient method with ABB stepsizes and a nonmonotone Armijo line search
/// against the largest of the last `nonmonotone_memory` objective values.
pub fn abb_gradient(p: &NonlinearProblem, variant: AbbVariant, cfg: &SolverConfig) -> Result<RunReport, SolverError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut x = p.x0.clone();
    let mut f = p.value(&x);
    let mut g = p.gradient(&x);
    let (mut nfe, mut nge) = (1usize, 1usize);
    let gnorm0 = g.norm();
    let mut gnorm = gnorm0;
    let threshold = cfg.threshold(gnorm0);
    let mut rec = Recorder::new(cfg.record_trajectory, &x);
    let mut rule = AbbRule::new(variant, cfg.memory);
    let mut window = VecDeque::with_capacity(cfg.nonmonotone_memory);
    window.push_back(f);

    let mut status = RunStatus::IterLimit;
    if !(f.is_finite() && gnorm0.is_finite()) {
        status = RunStatus::EvaluatorFailure;
    } else if gnorm0 <= threshold {
        status = RunStatus::Converged;
    }
    let mut beta = cfg.beta0.unwrap_or(1.0 / gnorm0);
    let (mut iterations, mut backtracks) = (0usize, 0usize);

    'outer: while status == RunStatus::IterLimit && iterations < cfg.max_iter {
        let mut nu = cfg.clamp(beta);
        iterations += 1;
        let f_max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gsq = gnorm * gnorm;
        let mut halvings = 0usize;
        let (x_new, f_new) = loop {
            let trial = &x - &g * nu;
            let ft = p.value(&trial);
            nfe += 1;
            if ft.is_finite() && ft <= f_max - cfg.c_ls * nu * gsq {
                break (trial, ft);
            }
            if ft.is_nan() {
                status = RunStatus::EvaluatorFailure;
                break 'outer;
            }
            if halvings == cfg.max_backtracks {
                status = RunStatus::LineSearchFailure;
                break 'outer;
            }
            halvings += 1;
            backtracks += 1;
            nu *= cfg.sigma_ls;
        };
        let g_new = p.gradient(&x_new);
        nge += 1;
        let gnorm_new = g_new.norm();
        if !gnorm_new.is_finite() {
            status = RunStatus::EvaluatorFailure;
            break;
        }
        rec.step(StepRecord { iteration: iterations, step: nu, f_ref: f_max, f_value: f_new, gnorm_sq: gsq, accepted: true });
        let s = &x_new - &x;
        let y = &g_new - &g;
        (x, f, g, gnorm) = (x_new, f_new, g_new, gnorm_new);
        rec.iterate(&x);
        if window.len() == cfg.nonmonotone_memory {
            window.pop_front();
        }
        window.push_back(f);
        if gnorm <= threshold {
            status = RunStatus::Converged;
            break;
        }
        let sty = s.dot(&y);
        beta = if sty > 0.0 { rule.step(s.norm_squared() / sty, sty / y.norm_squared()) } else { restart_step(gnorm) };
    }

    let (trajectory_hash, trajectory) = rec.finish(&x);
    Ok(RunReport {
        iterations,
        nfe,
        nge,
        sweeps: iterations,
        backtracks,
        cauchy_resets: 0,
        wall_time: start.elapsed().as_secs_f64(),
        status,
        gnorm0,
        final_gnorm: gnorm,
        final_f: f,
        trajectory_hash,
        x,
        trajectory,
    })
}
