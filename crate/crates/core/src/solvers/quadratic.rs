use std::time::Instant;

use nalgebra::DVector;

use super::{Recorder, RunReport, RunStatus, SolverConfig, SolverError, StepRecord};
use crate::engines::StepStack;
use crate::history::SweepHistory;
use crate::problems::{LinearOperator, QuadraticProblem};

/// Engine failures tolerated in a row before the run is abandoned.
pub(crate) const MAX_ENGINE_FAILURES: usize = 3;

/// Exact line-search step `gᵀg / gᵀAg`.
pub fn cauchy_step(g: &DVector<f64>, a: &dyn LinearOperator) -> Result<f64, SolverError> {
    let gg = g.norm_squared();
    if gg == 0.0 {
        return Err(SolverError::ZeroGradient);
    }
    let gag = g.dot(&a.apply(g));
    if !(gag > 0.0) {
        return Err(SolverError::NonPositiveCurvature(gag));
    }
    Ok(gg / gag)
}

/// Limited memory steepest descent for `½xᵀAx - bᵀx` with Fletcher's sweep
/// control: a step that fails to decrease `f` below the sweep reference is
/// undone and replaced by a Cauchy step.
pub fn solve_quadratic(p: &QuadraticProblem, cfg: &SolverConfig) -> Result<RunReport, SolverError> {
    cfg.validate()?;
    let n = p.dim();
    if p.x0.len() != n || p.hessian.dim() != n {
        return Err(SolverError::Dimension(format!("b has {n} entries, x0 {}, A is {}", p.x0.len(), p.hessian.dim())));
    }
    let start = Instant::now();
    let a = p.hessian.as_ref();

    let mut x = p.x0.clone();
    let mut g = p.gradient(&x);
    let mut f = p.value_from_gradient(&x, &g);
    let (mut nge, mut nfe) = (1usize, 1usize);
    let gnorm0 = g.norm();
    let mut gnorm = gnorm0;
    let threshold = cfg.threshold(gnorm0);
    let mut rec = Recorder::new(cfg.record_trajectory, &x);

    let mut history = SweepHistory::new(cfg.memory);
    history.push(g.clone(), 0.0);
    let mut stack = StepStack::single(cfg.clamp(cfg.beta0.unwrap_or(1.0 / gnorm0)));
    rec.stack(stack.steps());
    let mut f_ref = f;
    let (mut sweeps, mut cauchy_resets, mut failures) = (1usize, 0usize, 0usize);
    // An exact line-search step cannot increase f; when it appears to, the
    // comparison is below rounding level and repeating the reset would loop.
    let mut cauchy_pending = false;
    let mut iterations = 0usize;

    let mut status = if gnorm <= threshold { RunStatus::Converged } else { RunStatus::IterLimit };
    while status == RunStatus::IterLimit && iterations < cfg.max_iter {
        let nu = cfg.clamp(stack.next_step().expect("stack refilled before each iteration"));
        iterations += 1;
        let x_new = &x - &g * nu;
        let g_new = p.gradient(&x_new);
        nge += 1;
        let gnorm_new = g_new.norm();
        if gnorm_new <= threshold {
            let f_new = p.value_from_gradient(&x_new, &g_new);
            nfe += 1;
            rec.step(StepRecord { iteration: iterations, step: nu, f_ref, f_value: f_new, gnorm_sq: gnorm * gnorm, accepted: true });
            (x, f, gnorm) = (x_new, f_new, gnorm_new);
            rec.iterate(&x);
            status = RunStatus::Converged;
            break;
        }
        let f_new = p.value_from_gradient(&x_new, &g_new);
        nfe += 1;
        if cfg.monotone_control && f_new >= f_ref && !cauchy_pending {
            rec.step(StepRecord { iteration: iterations, step: nu, f_ref, f_value: f_new, gnorm_sq: gnorm * gnorm, accepted: false });
            cauchy_resets += 1;
            stack = StepStack::single(cfg.clamp(cauchy_step(&g, a)?));
            rec.stack(stack.steps());
            sweeps += 1;
            cauchy_pending = true;
            continue;
        }
        cauchy_pending = false;
        rec.step(StepRecord { iteration: iterations, step: nu, f_ref, f_value: f_new, gnorm_sq: gnorm * gnorm, accepted: true });
        if cfg.monotone_control && gnorm_new >= gnorm {
            stack.clear();
        }
        history.push(g_new.clone(), 1.0 / nu);
        (x, g, f, gnorm) = (x_new, g_new, f_new, gnorm_new);
        rec.iterate(&x);

        if stack.is_exhausted() {
            stack = match cfg.engine.compute(&history, cfg.thresh) {
                Ok(st) => {
                    failures = 0;
                    st
                }
                Err(_) => {
                    failures += 1;
                    if failures >= MAX_ENGINE_FAILURES {
                        status = RunStatus::EngineFailure;
                        break;
                    }
                    StepStack::single(cfg.clamp(cauchy_step(&g, a)?))
                }
            };
            rec.stack(stack.steps());
            sweeps += 1;
            f_ref = f;
        }
    }

    let (trajectory_hash, trajectory) = rec.finish(&x);
    Ok(RunReport {
        iterations,
        nfe,
        nge,
        sweeps,
        backtracks: 0,
        cauchy_resets,
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
