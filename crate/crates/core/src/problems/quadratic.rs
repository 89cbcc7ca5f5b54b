use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DiagonalOperator, ProblemError, QuadraticProblem};

/// `A = diag(1, ω, …, ω^{n-1})`, `b = 0`, `x₀ = e`.
pub fn geometric_quadratic(n: usize, omega: f64) -> Result<QuadraticProblem, ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidParameter(format!("n = {n}; need n >= 2")));
    }
    if !(omega > 1.0 && omega.is_finite()) {
        return Err(ProblemError::InvalidParameter(format!("omega = {omega}; need omega > 1")));
    }
    let diag = DVector::from_fn(n, |i, _| omega.powi(i as i32));
    let top = diag[n - 1];
    Ok(QuadraticProblem {
        hessian: Arc::new(DiagonalOperator { diag }),
        b: DVector::zeros(n),
        x0: DVector::from_element(n, 1.0),
        name: format!("geometric-n{n}-w{omega}"),
        spectrum_bounds: Some((1.0, top)),
    })
}

/// Diagonal quadratic with eigenvalues log-uniform in `[1, κ]` (both ends
/// attained), random `b` and `x₀` in `[-1, 1]ⁿ`.
pub fn random_quadratic(n: usize, kappa: f64, seed: u64) -> Result<QuadraticProblem, ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidParameter(format!("n = {n}; need n >= 2")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(ProblemError::InvalidParameter(format!("kappa = {kappa}; need kappa >= 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_k = kappa.ln();
    let diag = DVector::from_fn(n, |i, _| match i {
        0 => 1.0,
        _ if i == n - 1 => kappa,
        _ => (rng.gen::<f64>() * log_k).exp(),
    });
    let b = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let x0 = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    Ok(QuadraticProblem {
        hessian: Arc::new(DiagonalOperator { diag }),
        b,
        x0,
        name: format!("random-n{n}-k{kappa}-s{seed}"),
        spectrum_bounds: Some((1.0, kappa)),
    })
}
