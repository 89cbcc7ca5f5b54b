//! Stepsize engines: each turns a [`SweepHistory`] into a [`StepStack`].
//!
//! The quadratic engines extract Ritz or harmonic Ritz values from a basis
//! of the gradient (or gradient-difference) space. The general engines
//! symmetrize or constrain the secant relation first so that real
//! eigenvalues are available for non-quadratic objectives.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dense::{self, LinalgError};
use crate::history::SweepHistory;

pub mod general;
pub mod quadratic;

pub use general::{
    curtis_guo, curtis_guo_pencil, fletcher_perturbation, fletcher_tridiag, lyapunov_secant,
    lyapunov_secant_h, lyapunov_system, lyapunov_system_h, schnabel_matrix, schnabel_pert,
    schnabel_perturbation, solve_projected_lyapunov, LyapunovHandler, LyapunovSystem, Perturbation,
    PerturbationReport,
};
pub use quadratic::{
    fletcher_t, harmonic_fletcher, harmonic_pencil, harmonic_rq, harmonic_y_cholesky,
    harmonic_y_cholesky_matrix, harmonic_y_qr, harmonic_y_qr_matrix, harmonic_y_svd,
    harmonic_y_svd_matrix, ritz_cholesky, ritz_pivoted_qr, ritz_qr_matrix, ritz_svd,
    ritz_svd_matrix, FletcherT, HarmonicPencil,
};

/// Eigenvalues at or below this fraction of the largest one count as zero.
pub const ZERO_EIG_RATIO: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("history holds {0} gradient(s); at least two are needed")]
    InsufficientHistory(usize),
    #[error("projected matrix has no positive eigenvalue")]
    AllNegative,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Ordered positive stepsizes consumed one per iteration within a sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepStack {
    steps: Vec<f64>,
    cursor: usize,
}

impl StepStack {
    /// Sorts `steps` ascending.
    pub fn from_steps(mut steps: Vec<f64>) -> Self {
        steps.sort_by(f64::total_cmp);
        Self { steps, cursor: 0 }
    }

    pub fn single(step: f64) -> Self {
        Self { steps: vec![step], cursor: 0 }
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// True once every step has been consumed, or when the stack was cleared.
    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.steps.len()
    }

    pub fn next_step(&mut self) -> Option<f64> {
        let step = self.steps.get(self.cursor).copied();
        if step.is_some() {
            self.cursor += 1;
        }
        step
    }

    pub fn clear(&mut self) {
        self.steps.clear();
        self.cursor = 0;
    }
}

/// Builds a stack of `1/θ` from approximate eigenvalues `θ` of the Hessian.
pub fn stack_from_inverse(theta: &[f64]) -> Result<StepStack, EngineError> {
    positive_part(theta).map(|kept| StepStack::from_steps(kept.into_iter().map(|t| 1.0 / t).collect()))
}

/// Builds a stack directly from approximate eigenvalues of the inverse Hessian.
pub fn stack_from_direct(mu: &[f64]) -> Result<StepStack, EngineError> {
    positive_part(mu).map(StepStack::from_steps)
}

fn positive_part(vals: &[f64]) -> Result<Vec<f64>, EngineError> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NoConvergence.into());
    }
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(EngineError::AllNegative);
    }
    let floor = ZERO_EIG_RATIO * max;
    Ok(vals.iter().copied().filter(|&v| v > floor).collect())
}

/// Which basis (or construction) produced a projected matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    CholeskyG,
    QrG,
    SvdG,
    HarmonicPencil,
    CholeskyY,
    QrY,
    SvdY,
    Perturbed,
}

/// A small projected Hessian (or inverse Hessian), already symmetrized.
#[derive(Debug, Clone)]
pub struct ProjectedMatrix {
    pub matrix: DMatrix<f64>,
    pub basis: BasisKind,
    pub dim: usize,
    /// Eigenvalues approximate `A⁻¹` (use as stepsizes) rather than `A`.
    pub inverse: bool,
}

impl ProjectedMatrix {
    pub(crate) fn new(matrix: DMatrix<f64>, basis: BasisKind, inverse: bool) -> Self {
        let dim = matrix.nrows();
        Self { matrix, basis, dim, inverse }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, EngineError> {
        Ok(dense::sym_eig(&self.matrix)?.0)
    }

    pub fn to_stack(&self) -> Result<StepStack, EngineError> {
        let eig = self.eigenvalues()?;
        if self.inverse {
            stack_from_direct(&eig)
        } else {
            stack_from_inverse(&eig)
        }
    }
}

/// Every stepsize strategy, quadratic and general.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Ritz values from the Cholesky factor of `GᵀG` (LMSD-G).
    RitzCholesky,
    /// Ritz values from a pivoted QR of `G` (LMSD-G-QR).
    RitzQr,
    /// Ritz values from a truncated SVD of `G` (LMSD-G-SVD).
    RitzSvd,
    /// Harmonic Ritz values from the `T⁻¹P` pencil (LMSD-HG).
    HarmonicFletcher,
    /// Rayleigh quotients of harmonic Ritz vectors (LMSD-HG-RQ).
    HarmonicRq,
    /// Inverse harmonic Ritz values from the Cholesky factor of `YᵀY` (LMSD-HY).
    HarmonicYCholesky,
    HarmonicYQr,
    HarmonicYSvd,
    /// Tridiagonal symmetrization of `T` (LMSD-CHOL).
    FletcherTridiag,
    /// Harmonic symmetrization `P̃ = T̃ᵀT̃ + ξξᵀ` (LMSD-H-CHOL).
    CurtisGuo,
    /// Symmetric secant solution via a Lyapunov equation (LMSD-LYA*).
    Lyapunov(LyapunovHandler),
    /// Symmetric inverse secant solution (LMSD-H-LYA).
    LyapunovH,
    /// Minimum-norm perturbation of `Y` (LMSD-PERT).
    SchnabelPert,
}

impl Engine {
    pub const ALL: [Engine; 15] = [
        Engine::RitzCholesky,
        Engine::RitzQr,
        Engine::RitzSvd,
        Engine::HarmonicFletcher,
        Engine::HarmonicRq,
        Engine::HarmonicYCholesky,
        Engine::HarmonicYQr,
        Engine::HarmonicYSvd,
        Engine::FletcherTridiag,
        Engine::CurtisGuo,
        Engine::Lyapunov(LyapunovHandler::CholeskyG),
        Engine::Lyapunov(LyapunovHandler::QrG),
        Engine::Lyapunov(LyapunovHandler::SvdS),
        Engine::LyapunovH,
        Engine::SchnabelPert,
    ];

    pub const QUADRATIC: [Engine; 8] = [
        Engine::RitzCholesky,
        Engine::RitzQr,
        Engine::RitzSvd,
        Engine::HarmonicFletcher,
        Engine::HarmonicRq,
        Engine::HarmonicYCholesky,
        Engine::HarmonicYQr,
        Engine::HarmonicYSvd,
    ];

    pub const GENERAL: [Engine; 7] = [
        Engine::FletcherTridiag,
        Engine::CurtisGuo,
        Engine::Lyapunov(LyapunovHandler::CholeskyG),
        Engine::Lyapunov(LyapunovHandler::QrG),
        Engine::Lyapunov(LyapunovHandler::SvdS),
        Engine::LyapunovH,
        Engine::SchnabelPert,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Engine::RitzCholesky => "lmsd-g",
            Engine::RitzQr => "lmsd-g-qr",
            Engine::RitzSvd => "lmsd-g-svd",
            Engine::HarmonicFletcher => "lmsd-hg",
            Engine::HarmonicRq => "lmsd-hg-rq",
            Engine::HarmonicYCholesky => "lmsd-hy",
            Engine::HarmonicYQr => "lmsd-hy-qr",
            Engine::HarmonicYSvd => "lmsd-hy-svd",
            Engine::FletcherTridiag => "lmsd-chol",
            Engine::CurtisGuo => "lmsd-h-chol",
            Engine::Lyapunov(LyapunovHandler::CholeskyG) => "lmsd-lya",
            Engine::Lyapunov(LyapunovHandler::QrG) => "lmsd-lya-qr",
            Engine::Lyapunov(LyapunovHandler::SvdS) => "lmsd-lya-svd",
            Engine::LyapunovH => "lmsd-h-lya",
            Engine::SchnabelPert => "lmsd-pert",
        }
    }

    /// Computes the next stack of stepsizes, ascending and strictly positive.
    pub fn compute(&self, h: &SweepHistory, thresh: f64) -> Result<StepStack, EngineError> {
        match *self {
            Engine::RitzCholesky => ritz_cholesky(h),
            Engine::RitzQr => ritz_pivoted_qr(h, thresh),
            Engine::RitzSvd => ritz_svd(h, thresh),
            Engine::HarmonicFletcher => harmonic_fletcher(h).map(|(stack, _)| stack),
            Engine::HarmonicRq => harmonic_rq(h),
            Engine::HarmonicYCholesky => harmonic_y_cholesky(h),
            Engine::HarmonicYQr => harmonic_y_qr(h, thresh),
            Engine::HarmonicYSvd => harmonic_y_svd(h, thresh),
            Engine::FletcherTridiag => fletcher_tridiag(h),
            Engine::CurtisGuo => curtis_guo(h),
            Engine::Lyapunov(handler) => lyapunov_secant(h, handler, thresh),
            Engine::LyapunovH => lyapunov_secant_h(h, thresh),
            Engine::SchnabelPert => schnabel_pert(h),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown engine tag `{0}`")]
pub struct UnknownEngine(pub String);

impl FromStr for Engine {
    type Err = UnknownEngine;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Engine::ALL
            .iter()
            .copied()
            .find(|e| e.tag() == key)
            .ok_or_else(|| UnknownEngine(s.to_string()))
    }
}

/// `[G g_{m+1}]` with its inverse stepsizes, possibly after dropping the
/// oldest columns.
#[derive(Debug, Clone)]
pub(crate) struct Window {
    pub ext: DMatrix<f64>,
    pub alphas: Vec<f64>,
}

impl Window {
    pub fn from_history(h: &SweepHistory) -> Result<Self, EngineError> {
        if h.len() < 2 {
            return Err(EngineError::InsufficientHistory(h.len()));
        }
        Ok(Self { ext: h.extended_matrix(), alphas: h.inv_steps() })
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn drop_oldest(&self, d: usize) -> Self {
        let m = self.m();
        Self { ext: self.ext.columns(d, m + 1 - d).into_owned(), alphas: self.alphas[d..].to_vec() }
    }

    pub fn g(&self) -> DMatrix<f64> {
        self.ext.columns(0, self.m()).into_owned()
    }

    pub fn g_next(&self) -> DVector<f64> {
        self.ext.column(self.m()).into_owned()
    }

    /// Extended Gramian, accumulated in compensated arithmetic: the Cholesky
    /// engines inherit its rounding error amplified by its condition number.
    pub fn gram(&self) -> DMatrix<f64> {
        dense::gram2(&self.ext, &self.ext)
    }

    pub fn y(&self) -> DMatrix<f64> {
        let m = self.m();
        DMatrix::from_fn(self.ext.nrows(), m, |i, j| self.ext[(i, j + 1)] - self.ext[(i, j)])
    }

    pub fn s(&self) -> DMatrix<f64> {
        let mut s = self.g();
        for (j, a) in self.alphas.iter().enumerate() {
            s.column_mut(j).scale_mut(-1.0 / a);
        }
        s
    }
}

/// Cholesky of a leading Gramian block, dropping the oldest column on each
/// failure. With `extended`, the factored block includes the newest gradient.
/// Returns the number of dropped columns and the factor.
pub(crate) fn cholesky_dropping(gram: &DMatrix<f64>, m: usize, extended: bool) -> Result<(usize, DMatrix<f64>), EngineError> {
    let mut last = LinalgError::NotSpd { index: 0, pivot: 0.0 };
    for d in 0..m {
        let k = m - d + usize::from(extended);
        match dense::cholesky(&gram.view((d, d), (k, k)).into_owned()) {
            Ok(r) => return Ok((d, r)),
            Err(e) => last = e,
        }
    }
    Err(last.into())
}

pub(crate) fn scale_columns_inv(m: &DMatrix<f64>, alphas: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, a) in alphas.iter().enumerate() {
        out.column_mut(j).scale_mut(1.0 / a);
    }
    out
}

pub(crate) fn scale_rows_inv(m: &DMatrix<f64>, alphas: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, a) in alphas.iter().enumerate() {
        out.row_mut(i).scale_mut(1.0 / a);
    }
    out
}
