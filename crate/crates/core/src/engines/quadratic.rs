//! Ritz and harmonic Ritz engines for strictly convex quadratics.

use nalgebra::{DMatrix, DVector};

use super::{
    cholesky_dropping, stack_from_direct, stack_from_inverse, BasisKind, EngineError, ProjectedMatrix, StepStack,
    Window,
};
use crate::dense;
use crate::history::{build_j, build_jtilde, SweepHistory};

/// The unsymmetrized projection `T = [R r] J R⁻¹` from the Cholesky factor
/// `R` of `GᵀG`, with `Rᵀr = Gᵀg_{m+1}`.
#[derive(Debug, Clone)]
pub struct FletcherT {
    /// Oldest columns dropped before the Cholesky factorization succeeded.
    pub dropped: usize,
    pub r: DMatrix<f64>,
    pub r_next: DVector<f64>,
    /// Inverse stepsizes of the retained columns.
    pub alphas: Vec<f64>,
    pub t: DMatrix<f64>,
}

impl FletcherT {
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// `[R r]`, the `k x (k+1)` coefficient block.
    pub fn r_ext(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut out = DMatrix::zeros(k, k + 1);
        out.view_mut((0, 0), (k, k)).copy_from(&self.r);
        out.set_column(k, &self.r_next);
        out
    }
}

pub fn fletcher_t(h: &SweepHistory) -> Result<FletcherT, EngineError> {
    let win = Window::from_history(h)?;
    let m = win.m();
    let gram = win.gram();
    let (d, r) = cholesky_dropping(&gram, m, false)?;
    let k = m - d;
    let rhs = gram.view((d, m), (k, 1)).into_owned();
    let r_next = dense::solve_upper_transpose(&r, &rhs)?.column(0).into_owned();
    let alphas = win.alphas[d..].to_vec();
    let mut out = FletcherT { dropped: d, r, r_next, alphas, t: DMatrix::zeros(0, 0) };
    out.t = dense::right_solve_upper(&(out.r_ext() * build_j(&out.alphas)), &out.r)?;
    Ok(out)
}

/// Ritz values via the Cholesky route; `T` is symmetrized from its lower
/// triangle, which is exact on quadratics where `T` is tridiagonal.
pub fn ritz_cholesky(h: &SweepHistory) -> Result<StepStack, EngineError> {
    let ft = fletcher_t(h)?;
    ProjectedMatrix::new(dense::sym_from_lower(&ft.t), BasisKind::CholeskyG, false).to_stack()
}

/// `(X Π̂)[:, ..s] R_G⁻¹` where `X = [R Πᵀ, tail]·factor` and `R` comes from a
/// pivoted QR of `basis`. `tail_sign` scales `Qᵀg_{m+1}`.
fn qr_projection(
    basis: &DMatrix<f64>,
    g_next: &DVector<f64>,
    tail_sign: f64,
    factor: &DMatrix<f64>,
    thresh: f64,
) -> Result<DMatrix<f64>, EngineError> {
    let qr = dense::pivoted_qr(basis, thresh)?;
    let s = qr.rank;
    let m = basis.ncols();
    let mut x = DMatrix::zeros(s, m + 1);
    for j in 0..m {
        x.set_column(qr.perm[j], &qr.r.column(j).rows(0, s));
    }
    x.set_column(m, &(qr.q_leading().transpose() * g_next * tail_sign));
    let xf = x * factor;
    let sel = DMatrix::from_fn(s, s, |i, j| xf[(i, qr.perm[j])]);
    Ok(dense::right_solve_upper(&sel, &qr.r_leading())?)
}

/// `[Σ Vᵀ, tail]·factor·V Σ⁻¹` from a truncated SVD of `basis`.
fn svd_projection(
    basis: &DMatrix<f64>,
    g_next: &DVector<f64>,
    tail_sign: f64,
    factor: &DMatrix<f64>,
    thresh: f64,
) -> Result<DMatrix<f64>, EngineError> {
    let sv = dense::svd(basis, thresh)?;
    let s = sv.rank;
    let m = basis.ncols();
    let mut x = DMatrix::zeros(s, m + 1);
    for i in 0..s {
        for j in 0..m {
            x[(i, j)] = sv.sigma[i] * sv.v[(j, i)];
        }
    }
    x.set_column(m, &(sv.u.transpose() * g_next * tail_sign));
    let mut out = x * factor * &sv.v;
    for (j, sigma) in sv.sigma.iter().enumerate() {
        out.column_mut(j).scale_mut(1.0 / sigma);
    }
    Ok(out)
}

/// Symmetrized Ritz projection on the pivoted-QR basis of `G`.
pub fn ritz_qr_matrix(h: &SweepHistory, thresh: f64) -> Result<ProjectedMatrix, EngineError> {
    let win = Window::from_history(h)?;
    let b = qr_projection(&win.g(), &win.g_next(), 1.0, &build_j(&win.alphas), thresh)?;
    Ok(ProjectedMatrix::new(dense::sym_part(&b), BasisKind::QrG, false))
}

pub fn ritz_pivoted_qr(h: &SweepHistory, thresh: f64) -> Result<StepStack, EngineError> {
    ritz_qr_matrix(h, thresh)?.to_stack()
}

/// Symmetrized Ritz projection on the leading left singular vectors of `G`.
pub fn ritz_svd_matrix(h: &SweepHistory, thresh: f64) -> Result<ProjectedMatrix, EngineError> {
    let win = Window::from_history(h)?;
    let b = svd_projection(&win.g(), &win.g_next(), 1.0, &build_j(&win.alphas), thresh)?;
    Ok(ProjectedMatrix::new(dense::sym_part(&b), BasisKind::SvdG, false))
}

pub fn ritz_svd(h: &SweepHistory, thresh: f64) -> Result<StepStack, EngineError> {
    ritz_svd_matrix(h, thresh)?.to_stack()
}

/// The harmonic pencil built from the extended Cholesky factor of `[G g]ᵀ[G g]`.
#[derive(Debug, Clone)]
pub struct HarmonicPencil {
    pub dropped: usize,
    /// `T`, the leading `k x k` block of `[[R, r], [0, ρ]] J R⁻¹`.
    pub t: DMatrix<f64>,
    /// `T` symmetrized from its lower triangle.
    pub t_sym: DMatrix<f64>,
    /// `P = TᵀT + ξξᵀ`, symmetric positive definite.
    pub p: DMatrix<f64>,
    /// Last row of the extended product.
    pub xi: DVector<f64>,
    /// Eigenvalues of the pencil `(t_sym, p)`, ascending; these approximate
    /// eigenvalues of `A⁻¹`.
    pub mu: Vec<f64>,
    /// `P`-orthonormal pencil eigenvectors.
    pub vecs: DMatrix<f64>,
}

pub fn harmonic_pencil(h: &SweepHistory) -> Result<HarmonicPencil, EngineError> {
    let win = Window::from_history(h)?;
    let m = win.m();
    let (d, rext) = cholesky_dropping(&win.gram(), m, true)?;
    let k = m - d;
    let r = rext.view((0, 0), (k, k)).into_owned();
    let prod = dense::right_solve_upper(&(&rext * build_j(&win.alphas[d..])), &r)?;
    let t = prod.rows(0, k).into_owned();
    let xi = prod.row(k).transpose();
    let p = dense::sym_part(&(prod.transpose() * &prod));
    let t_sym = dense::sym_from_lower(&t);
    let (mu, vecs) = dense::sym_definite_eig(&t_sym, &p)?;
    Ok(HarmonicPencil { dropped: d, t, t_sym, p, xi, mu, vecs })
}

/// Harmonic Ritz stepsizes together with the pencil eigenvectors.
pub fn harmonic_fletcher(h: &SweepHistory) -> Result<(StepStack, DMatrix<f64>), EngineError> {
    let pencil = harmonic_pencil(h)?;
    Ok((stack_from_direct(&pencil.mu)?, pencil.vecs))
}

/// Inverse Rayleigh quotients `c̃ᵀc̃ / c̃ᵀTc̃` of the harmonic Ritz vectors.
pub fn harmonic_rq(h: &SweepHistory) -> Result<StepStack, EngineError> {
    let pencil = harmonic_pencil(h)?;
    let theta: Vec<f64> = pencil
        .vecs
        .column_iter()
        .map(|c| {
            let c = c.normalize();
            (c.transpose() * &pencil.t_sym * &c)[(0, 0)]
        })
        .collect();
    stack_from_inverse(&theta)
}

/// `[Y, -g_{m+1}]` for the retained window.
fn y_window(win: &Window) -> (DMatrix<f64>, DVector<f64>) {
    (win.y(), win.g_next())
}

/// Symmetrized `H = [R̃ r̃] J̃ R̃⁻¹` with `R̃ᵀR̃ = YᵀY`, `R̃ᵀr̃ = -Yᵀg_{m+1}`.
pub fn harmonic_y_cholesky_matrix(h: &SweepHistory) -> Result<ProjectedMatrix, EngineError> {
    let win = Window::from_history(h)?;
    let m = win.m();
    let (y, g_next) = y_window(&win);
    let gram = dense::gram2(&y, &y);
    let (d, r) = cholesky_dropping(&gram, m, false)?;
    let k = m - d;
    let yd = y.columns(d, k);
    let rhs = -dense::gram2(&yd.into_owned(), &DMatrix::from_column_slice(g_next.len(), 1, g_next.as_slice())).column(0).into_owned();
    let rt = dense::solve_upper_transpose(&r, &DMatrix::from_column_slice(k, 1, rhs.as_slice()))?;
    let mut coef = DMatrix::zeros(k, k + 1);
    coef.view_mut((0, 0), (k, k)).copy_from(&r);
    coef.set_column(k, &rt.column(0));
    let hm = dense::right_solve_upper(&(coef * build_jtilde(&win.alphas[d..])), &r)?;
    Ok(ProjectedMatrix::new(dense::sym_part(&hm), BasisKind::CholeskyY, true))
}

pub fn harmonic_y_cholesky(h: &SweepHistory) -> Result<StepStack, EngineError> {
    harmonic_y_cholesky_matrix(h)?.to_stack()
}

pub fn harmonic_y_qr_matrix(h: &SweepHistory, thresh: f64) -> Result<ProjectedMatrix, EngineError> {
    let win = Window::from_history(h)?;
    let (y, g_next) = y_window(&win);
    let hm = qr_projection(&y, &g_next, -1.0, &build_jtilde(&win.alphas), thresh)?;
    Ok(ProjectedMatrix::new(dense::sym_part(&hm), BasisKind::QrY, true))
}

pub fn harmonic_y_qr(h: &SweepHistory, thresh: f64) -> Result<StepStack, EngineError> {
    harmonic_y_qr_matrix(h, thresh)?.to_stack()
}

pub fn harmonic_y_svd_matrix(h: &SweepHistory, thresh: f64) -> Result<ProjectedMatrix, EngineError> {
    let win = Window::from_history(h)?;
    let (y, g_next) = y_window(&win);
    let hm = svd_projection(&y, &g_next, -1.0, &build_jtilde(&win.alphas), thresh)?;
    Ok(ProjectedMatrix::new(dense::sym_part(&hm), BasisKind::SvdY, true))
}

pub fn harmonic_y_svd(h: &SweepHistory, thresh: f64) -> Result<StepStack, EngineError> {
    harmonic_y_svd_matrix(h, thresh)?.to_stack()
}
