use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NonlinearProblem, Objective, ProblemError};

pub const BUILTIN_NAMES: [&str; 5] =
    ["extended-rosenbrock", "chained-rosenbrock", "diagonal-quartic", "trigonometric", "broyden-tridiagonal"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Builtin {
    ExtendedRosenbrock,
    ChainedRosenbrock,
    DiagonalQuartic,
    Trigonometric,
    BroydenTridiagonal,
}

#[derive(Debug)]
struct BuiltinObjective {
    kind: Builtin,
    n: usize,
}

/// A named test function of dimension `n` with its customary starting point.
///
/// Known minimizers: `e` for both Rosenbrock variants, `0` for
/// diagonal-quartic and trigonometric (both with `f = 0`); the
/// broyden-tridiagonal residuals vanish at a nonzero root.
pub fn builtin_nonlinear(name: &str, n: usize) -> Result<NonlinearProblem, ProblemError> {
    let kind = match name {
        "extended-rosenbrock" => Builtin::ExtendedRosenbrock,
        "chained-rosenbrock" => Builtin::ChainedRosenbrock,
        "diagonal-quartic" => Builtin::DiagonalQuartic,
        "trigonometric" => Builtin::Trigonometric,
        "broyden-tridiagonal" => Builtin::BroydenTridiagonal,
        other => return Err(ProblemError::UnknownProblem(other.to_string())),
    };
    if n < 2 {
        return Err(ProblemError::InvalidParameter(format!("n = {n}; need n >= 2")));
    }
    if kind == Builtin::ExtendedRosenbrock && n % 2 != 0 {
        return Err(ProblemError::InvalidParameter(format!("extended-rosenbrock needs even n, got {n}")));
    }
    let x0 = match kind {
        Builtin::ExtendedRosenbrock | Builtin::ChainedRosenbrock => {
            DVector::from_fn(n, |i, _| if i % 2 == 0 { -1.2 } else { 1.0 })
        }
        Builtin::DiagonalQuartic => DVector::from_element(n, 1.0),
        Builtin::Trigonometric => DVector::from_element(n, 1.0 / n as f64),
        Builtin::BroydenTridiagonal => DVector::from_element(n, -1.0),
    };
    Ok(NonlinearProblem { objective: Arc::new(BuiltinObjective { kind, n }), x0, name: format!("{name}-{n}") })
}

impl BuiltinObjective {
    fn trig_residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n as f64;
        let c: f64 = x.iter().map(|v| v.cos()).sum();
        DVector::from_fn(self.n, |i, _| n - c + (i + 1) as f64 * (1.0 - x[i].cos()) - x[i].sin())
    }

    fn broyden_residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |i, _| {
            let prev = if i > 0 { x[i - 1] } else { 0.0 };
            let next = if i + 1 < n { x[i + 1] } else { 0.0 };
            (3.0 - 2.0 * x[i]) * x[i] - prev - 2.0 * next + 1.0
        })
    }
}

impl Objective for BuiltinObjective {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        match self.kind {
            Builtin::ExtendedRosenbrock => (0..self.n / 2)
                .map(|k| {
                    let (a, b) = (x[2 * k], x[2 * k + 1]);
                    100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2)
                })
                .sum(),
            Builtin::ChainedRosenbrock => {
                (0..self.n - 1).map(|i| 100.0 * (x[i + 1] - x[i] * x[i]).powi(2) + (1.0 - x[i]).powi(2)).sum()
            }
            Builtin::DiagonalQuartic => x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v.powi(4) / 4.0).sum(),
            Builtin::Trigonometric => self.trig_residuals(x).norm_squared(),
            Builtin::BroydenTridiagonal => self.broyden_residuals(x).norm_squared(),
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        match self.kind {
            Builtin::ExtendedRosenbrock => {
                let mut g = DVector::zeros(n);
                for k in 0..n / 2 {
                    let (a, b) = (x[2 * k], x[2 * k + 1]);
                    let t = b - a * a;
                    g[2 * k] = -400.0 * a * t - 2.0 * (1.0 - a);
                    g[2 * k + 1] = 200.0 * t;
                }
                g
            }
            Builtin::ChainedRosenbrock => {
                let mut g = DVector::zeros(n);
                for i in 0..n - 1 {
                    let t = x[i + 1] - x[i] * x[i];
                    g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
                    g[i + 1] += 200.0 * t;
                }
                g
            }
            Builtin::DiagonalQuartic => DVector::from_fn(n, |i, _| (i + 1) as f64 * x[i].powi(3)),
            Builtin::Trigonometric => {
                let r = self.trig_residuals(x);
                let total = r.sum();
                DVector::from_fn(n, |j, _| {
                    let (s, c) = x[j].sin_cos();
                    2.0 * s * total + 2.0 * r[j] * ((j + 1) as f64 * s - c)
                })
            }
            Builtin::BroydenTridiagonal => {
                let r = self.broyden_residuals(x);
                DVector::from_fn(n, |j, _| {
                    let mut g = r[j] * (3.0 - 4.0 * x[j]);
                    if j + 1 < n {
                        g -= r[j + 1];
                    }
                    if j > 0 {
                        g -= 2.0 * r[j - 1];
                    }
                    2.0 * g
                })
            }
        }
    }
}

/// Worst relative discrepancy `‖fd - g‖∞ / max(‖g‖∞, 1)` between central
/// differences with step `h` and the analytic gradient, over `points` random
/// points in the box `x₀ ± 0.5`.
pub fn gradient_check(p: &NonlinearProblem, points: usize, h: f64, seed: u64) -> Result<f64, ProblemError> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(ProblemError::InvalidParameter(format!("h = {h}; need 1e-8 <= h <= 1e-4")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dim();
    let mut worst = 0.0f64;
    for _ in 0..points {
        let mut x = DVector::from_fn(n, |i, _| p.x0[i] + rng.gen_range(-0.5..0.5));
        let g = p.gradient(&x);
        let mut err = 0.0f64;
        for i in 0..n {
            let xi = x[i];
            x[i] = xi + h;
            let fp = p.value(&x);
            x[i] = xi - h;
            let fm = p.value(&x);
            x[i] = xi;
            let fd = (fp - fm) / (2.0 * h);
            if !(fd.is_finite() && g[i].is_finite()) {
                return Err(ProblemError::EvaluatorFailure);
            }
            err = err.max((fd - g[i]).abs());
        }
        worst = worst.max(err / g.amax().max(1.0));
    }
    Ok(worst)
}
