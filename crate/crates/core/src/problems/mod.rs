//! Test problems: quadratics given by a Hessian operator and general
//! objectives with analytic gradients.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use thiserror::Error;

mod matrix_market;
mod nonlinear;
mod quadratic;

pub use matrix_market::{load_matrix_market, read_matrix_market, write_matrix_market};
pub use nonlinear::{builtin_nonlinear, gradient_check, BUILTIN_NAMES};
pub use quadratic::{geometric_quadratic, random_quadratic};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix market header lacks the `symmetric` qualifier")]
    NotSymmetric,
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid problem parameter: {0}")]
    InvalidParameter(String),
    #[error("objective returned a non-finite value at a sampled point")]
    EvaluatorFailure,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A symmetric linear operator `x ↦ Ax`.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Stored lower-triangle entries `(row, col, value)` with `row >= col`.
    fn lower_triplets(&self) -> Vec<(usize, usize, f64)>;
}

#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pub diag: DVector<f64>,
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.diag.component_mul(x)
    }

    fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        self.diag.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, i, v)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let n = self.matrix.nrows();
        let mut out = Vec::new();
        for j in 0..n {
            for i in j..n {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// Symmetric sparse matrix held in full CSR form.
#[derive(Debug, Clone)]
pub struct SparseSymmetric {
    csr: CsrMatrix<f64>,
}

impl SparseSymmetric {
    /// Builds the operator from one triangle of entries; off-diagonal entries
    /// are mirrored and duplicates summed.
    pub fn from_triangle(n: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut coo = CooMatrix::new(n, n);
        for &(i, j, v) in entries {
            coo.push(i, j, v);
            if i != j {
                coo.push(j, i, v);
            }
        }
        Self { csr: CsrMatrix::from(&coo) }
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }
}

impl LinearOperator for SparseSymmetric {
    fn dim(&self) -> usize {
        self.csr.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.csr.nrows());
        for (i, row) in self.csr.row_iter().enumerate() {
            y[i] = row.col_indices().iter().zip(row.values()).map(|(&j, &v)| v * x[j]).sum();
        }
        y
    }

    fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        self.csr.triplet_iter().filter(|(i, j, _)| i >= j).map(|(i, j, &v)| (i, j, v)).collect()
    }
}

/// `f(x) = ½xᵀAx - bᵀx`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    pub hessian: Arc<dyn LinearOperator>,
    pub b: DVector<f64>,
    pub x0: DVector<f64>,
    pub name: String,
    /// `(λ₁, λ_n)` when known exactly.
    pub spectrum_bounds: Option<(f64, f64)>,
}

impl QuadraticProblem {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.hessian.apply(x) - &self.b
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&self.hessian.apply(x)) - self.b.dot(x)
    }

    /// `f(x)` from an already computed gradient `g = Ax - b`.
    pub fn value_from_gradient(&self, x: &DVector<f64>, g: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(g - &self.b))
    }

    /// The objective `f / c`: Hessian, `b` and spectrum bounds divided by `c`.
    pub fn scaled(&self, c: f64) -> QuadraticProblem {
        QuadraticProblem {
            hessian: Arc::new(ScaledOperator { inner: Arc::clone(&self.hessian), factor: 1.0 / c }),
            b: &self.b / c,
            x0: self.x0.clone(),
            name: self.name.clone(),
            spectrum_bounds: self.spectrum_bounds.map(|(lo, hi)| (lo / c, hi / c)),
        }
    }

    /// Scaled so that the initial gradient has unit norm.
    pub fn normalized(&self) -> QuadraticProblem {
        self.scaled(self.gradient(&self.x0).norm())
    }

    /// The same objective seen through the general [`Objective`] interface.
    pub fn as_nonlinear(&self) -> NonlinearProblem {
        NonlinearProblem {
            objective: Arc::new(QuadraticObjective { hessian: Arc::clone(&self.hessian), b: self.b.clone() }),
            x0: self.x0.clone(),
            name: self.name.clone(),
        }
    }
}

#[derive(Debug)]
struct ScaledOperator {
    inner: Arc<dyn LinearOperator>,
    factor: f64,
}

impl LinearOperator for ScaledOperator {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner.apply(x) * self.factor
    }

    fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.lower_triplets().into_iter().map(|(i, j, v)| (i, j, v * self.factor)).collect()
    }
}

#[derive(Debug)]
struct QuadraticObjective {
    hessian: Arc<dyn LinearOperator>,
    b: DVector<f64>,
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&self.hessian.apply(x)) - self.b.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.hessian.apply(x) - &self.b
    }
}

/// A continuously differentiable objective with an analytic gradient.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

#[derive(Debug, Clone)]
pub struct NonlinearProblem {
    pub objective: Arc<dyn Objective>,
    pub x0: DVector<f64>,
    pub name: String,
}

impl NonlinearProblem {
    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.objective.gradient(x)
    }

    /// Wraps a pair of closures.
    pub fn from_fns<F, G>(name: &str, x0: DVector<f64>, value: F, gradient: G) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        let n = x0.len();
        Self { objective: Arc::new(FnObjective { n, value: Box::new(value), gradient: Box::new(gradient) }), x0, name: name.into() }
    }
}

type ValueFn = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradientFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

struct FnObjective {
    n: usize,
    value: ValueFn,
    gradient: GradientFn,
}

impl fmt::Debug for FnObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnObjective").field("n", &self.n).finish_non_exhaustive()
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }
}
