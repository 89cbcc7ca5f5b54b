use std::time::Instant;

use super::quadratic::MAX_ENGINE_FAILURES;
use super::{restart_step, Recorder, RunReport, RunStatus, SolverConfig, SolverError, StepRecord};
use crate::engines::{EngineError, StepStack};
use crate::history::SweepHistory;
use crate::problems::NonlinearProblem;

/// Limited memory steepest descent for a general smooth objective.
///
/// Each step must satisfy `f(x_k - ν g_k) ≤ f_ref - c_ls ν ‖g_k‖²` where
/// `f_ref` is the objective at the start of the current sweep; failing
/// trials are shrunk by `sigma_ls` and end the sweep.
pub fn solve_general(p: &NonlinearProblem, cfg: &SolverConfig) -> Result<RunReport, SolverError> {
    cfg.validate()?;
    if p.objective.dim() != p.dim() {
        return Err(SolverError::Dimension(format!("x0 has {} entries, objective expects {}", p.dim(), p.objective.dim())));
    }
    let start = Instant::now();

    let mut x = p.x0.clone();
    let mut f = p.value(&x);
    let mut g = p.gradient(&x);
    let (mut nfe, mut nge) = (1usize, 1usize);
    let gnorm0 = g.norm();
    let mut gnorm = gnorm0;
    let threshold = cfg.threshold(gnorm0);
    let mut rec = Recorder::new(cfg.record_trajectory, &x);

    let mut status = RunStatus::IterLimit;
    if !(f.is_finite() && gnorm0.is_finite()) {
        status = RunStatus::EvaluatorFailure;
    } else if gnorm0 <= threshold {
        status = RunStatus::Converged;
    }

    let mut history = SweepHistory::new(cfg.memory);
    history.push(g.clone(), 0.0);
    let mut stack = StepStack::single(cfg.beta0.unwrap_or(1.0 / gnorm0));
    rec.stack(stack.steps());
    let mut f_ref = f;
    let (mut sweeps, mut backtracks, mut failures, mut iterations) = (1usize, 0usize, 0usize, 0usize);

    'outer: while status == RunStatus::IterLimit && iterations < cfg.max_iter {
        let mut nu = cfg.clamp(stack.next_step().expect("stack refilled before each iteration"));
        iterations += 1;
        let gsq = gnorm * gnorm;
        let mut halvings = 0usize;
        let (x_new, f_new) = loop {
            let trial = &x - &g * nu;
            let ft = p.value(&trial);
            nfe += 1;
            if ft.is_finite() && ft <= f_ref - cfg.c_ls * nu * gsq {
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
        if halvings > 0 {
            stack.clear();
        }
        let g_new = p.gradient(&x_new);
        nge += 1;
        let gnorm_new = g_new.norm();
        if !gnorm_new.is_finite() {
            status = RunStatus::EvaluatorFailure;
            break;
        }
        rec.step(StepRecord { iteration: iterations, step: nu, f_ref, f_value: f_new, gnorm_sq: gsq, accepted: true });
        history.push(g_new.clone(), 1.0 / nu);
        let increased = gnorm_new >= gnorm;
        (x, f, g, gnorm) = (x_new, f_new, g_new, gnorm_new);
        rec.iterate(&x);
        if gnorm <= threshold {
            status = RunStatus::Converged;
            break;
        }
        if increased {
            stack.clear();
        }

        if stack.is_exhausted() {
            stack = match cfg.engine.compute(&history, cfg.thresh) {
                Ok(st) => {
                    failures = 0;
                    history.keep_last(st.len());
                    st
                }
                Err(EngineError::AllNegative) => {
                    history.keep_last(1);
                    StepStack::single(restart_step(gnorm))
                }
                Err(_) => {
                    failures += 1;
                    if failures >= MAX_ENGINE_FAILURES {
                        status = RunStatus::EngineFailure;
                        break;
                    }
                    StepStack::single(restart_step(gnorm))
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
