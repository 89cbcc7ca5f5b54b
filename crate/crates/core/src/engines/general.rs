//! Engines for general objectives, where `T` is no longer symmetric and
//! the secant relation must be symmetrized or relaxed.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::{
    cholesky_dropping, scale_columns_inv, scale_rows_inv, stack_from_direct, stack_from_inverse, BasisKind,
    EngineError, ProjectedMatrix, StepStack, Window,
};
use crate::dense;
use crate::history::{build_k, SweepHistory};
use crate::engines::quadratic::{fletcher_t, FletcherT};

/// Tridiagonal symmetrization: identical arithmetic to the Cholesky Ritz engine.
pub fn fletcher_tridiag(h: &SweepHistory) -> Result<StepStack, EngineError> {
    super::quadratic::ritz_cholesky(h)
}

/// Norms describing a perturbation `Ỹ = Y + ΔY` that restores symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    /// `‖YᵀS - SᵀY‖_F`
    pub asym_before: f64,
    /// `‖ỸᵀS - SᵀỸ‖_F`
    pub asym_after: f64,
    /// `‖ΔY‖₂`
    pub pert_norm: f64,
    /// An a-priori bound on `‖ΔY‖₂`, when one is known.
    pub pert_norm_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Perturbation {
    pub s: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub delta_y: DMatrix<f64>,
    pub report: PerturbationReport,
}

fn perturbation(s: DMatrix<f64>, y: DMatrix<f64>, delta_y: DMatrix<f64>, bound: Option<f64>) -> Result<Perturbation, EngineError> {
    let asym = |yy: &DMatrix<f64>| {
        let sty = s.transpose() * yy;
        (sty.transpose() - sty).norm()
    };
    let yt = &y + &delta_y;
    let report = PerturbationReport {
        asym_before: asym(&y),
        asym_after: asym(&yt),
        pert_norm: dense::spectral_norm(&delta_y)?,
        pert_norm_bound: bound,
    };
    Ok(Perturbation { s, y, delta_y, report })
}

/// The `ΔY` implied by replacing `T` with its lower-triangle symmetrization:
/// `ΔY = Q (U - Lᵀ) R D⁻¹` with `Q = G R⁻¹`.
pub fn fletcher_perturbation(h: &SweepHistory) -> Result<Perturbation, EngineError> {
    let win = Window::from_history(h)?;
    let ft = fletcher_t(h)?;
    let win = win.drop_oldest(ft.dropped);
    let q = dense::right_solve_upper(&win.g(), &ft.r)?;
    let lower = dense::strict_lower(&ft.t);
    let upper = dense::strict_upper(&ft.t);
    let core = (upper - lower.transpose()) * &ft.r;
    let delta_y = q * scale_columns_inv(&core, &win.alphas);
    let t_tilde = dense::sym_from_lower(&ft.t);
    let beta_max = win.alphas.iter().map(|a| 1.0 / a).fold(0.0, f64::max);
    let bound = beta_max * dense::spectral_norm(&ft.r)? * dense::spectral_norm(&(&ft.t - t_tilde))?;
    perturbation(win.s(), win.y(), delta_y, Some(bound))
}

/// `M = [[R, r], [0, ρ]] J R⁻¹`, split into `(T, ξ)`.
fn extended_product(win: &Window) -> Result<(usize, DMatrix<f64>, DMatrix<f64>), EngineError> {
    let m = win.m();
    let (d, rext) = cholesky_dropping(&win.gram(), m, true)?;
    let k = m - d;
    let r = rext.view((0, 0), (k, k)).into_owned();
    let prod = dense::right_solve_upper(&(&rext * crate::history::build_j(&win.alphas[d..])), &r)?;
    Ok((d, rext, prod))
}

/// `(T̃, P̃)` with `T̃` the lower-triangle symmetrization of `T` and
/// `P̃ = T̃ᵀT̃ + ξξᵀ`.
pub fn curtis_guo_pencil(h: &SweepHistory) -> Result<(DMatrix<f64>, DMatrix<f64>), EngineError> {
    let win = Window::from_history(h)?;
    let (_, _, prod) = extended_product(&win)?;
    let k = prod.ncols();
    let t_tilde = dense::sym_from_lower(&prod.rows(0, k).into_owned());
    let xi: DVector<f64> = prod.row(k).transpose();
    let p_tilde = dense::sym_part(&(t_tilde.transpose() * &t_tilde + &xi * xi.transpose()));
    Ok((t_tilde, p_tilde))
}

/// Harmonic stepsizes from the symmetrized pencil `(T̃, P̃)`.
pub fn curtis_guo(h: &SweepHistory) -> Result<StepStack, EngineError> {
    let (t_tilde, p_tilde) = curtis_guo_pencil(h)?;
    let (mu, _) = dense::sym_definite_eig(&t_tilde, &p_tilde)?;
    stack_from_direct(&mu)
}

/// How the Lyapunov-based engine obtains `E` (with `EᵀE = SᵀS` up to a
/// change of basis) and the right-hand side `F = SᵀY + YᵀS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LyapunovHandler {
    /// `E = R D⁻¹` from the Cholesky factor of `GᵀG`.
    CholeskyG,
    /// `E = R_G D_G⁻¹` on the leading columns of a pivoted QR of `G`.
    QrG,
    /// `E = S` handled directly through its truncated SVD.
    SvdS,
}

impl LyapunovHandler {
    pub fn name(&self) -> &'static str {
        match self {
            LyapunovHandler::CholeskyG => "cholesky-g",
            LyapunovHandler::QrG => "qr-g",
            LyapunovHandler::SvdS => "svd-s",
        }
    }
}

impl fmt::Display for LyapunovHandler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LyapunovHandler {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cholesky-g" => Ok(LyapunovHandler::CholeskyG),
            "qr-g" => Ok(LyapunovHandler::QrG),
            "svd-s" => Ok(LyapunovHandler::SvdS),
            other => Err(format!("unknown Lyapunov handler `{other}`")),
        }
    }
}

/// A solved projected Lyapunov equation `EᵀE B + B EᵀE = F`.
///
/// With `E V = U diag(σ)` truncated to `σ_i² ≥ thresh σ_1²`, the solution
/// is `B = V B_E Vᵀ` where `diag(σ²) B_E + B_E diag(σ²) = Vᵀ F V`.
#[derive(Debug, Clone)]
pub struct LyapunovSystem {
    /// `E`, in the coordinates of `columns`.
    pub e: DMatrix<f64>,
    /// `F`, in the same coordinates.
    pub rhs: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
    pub b_e: DMatrix<f64>,
    /// History columns (after any drops) that index the coordinates of `E`.
    pub columns: Vec<usize>,
}

impl LyapunovSystem {
    /// `V B_E Vᵀ` in the coordinates of `columns`.
    pub fn full(&self) -> DMatrix<f64> {
        &self.v * &self.b_e * self.v.transpose()
    }

    /// `‖EᵀE B + B EᵀE - F‖_F` for `B = full()`.
    pub fn residual(&self) -> f64 {
        let ete = self.e.transpose() * &self.e;
        let b = self.full();
        (&ete * &b + &b * &ete - &self.rhs).norm()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>, EngineError> {
        Ok(dense::sym_eig(&self.b_e)?.0)
    }
}

/// Solves `EᵀE B + B EᵀE = F` on the dominant right singular subspace of `E`.
pub fn solve_projected_lyapunov(e: DMatrix<f64>, rhs: DMatrix<f64>, thresh: f64, columns: Vec<usize>) -> Result<LyapunovSystem, EngineError> {
    let sv = dense::svd(&e, thresh.sqrt())?;
    let f_e = sv.v.transpose() * &rhs * &sv.v;
    let b_e = dense::sym_part(&dense::lyap_diag_solve(&sv.sigma, &f_e));
    Ok(LyapunovSystem { e, rhs, sigma: sv.sigma, v: sv.v, b_e, columns })
}

/// `SᵀY = -D⁻¹ Rᵀ [R r] K` from the Cholesky route.
fn sty_cholesky(ft: &FletcherT) -> DMatrix<f64> {
    let inner = ft.r.transpose() * ft.r_ext() * build_k(ft.dim());
    -scale_rows_inv(&inner, &ft.alphas)
}

pub fn lyapunov_system(h: &SweepHistory, handler: LyapunovHandler, thresh: f64) -> Result<LyapunovSystem, EngineError> {
    match handler {
        LyapunovHandler::CholeskyG => {
            let ft = fletcher_t(h)?;
            let e = scale_columns_inv(&ft.r, &ft.alphas);
            let sty = sty_cholesky(&ft);
            let rhs = &sty + sty.transpose();
            let columns = (ft.dropped..ft.dropped + ft.dim()).collect();
            solve_projected_lyapunov(e, rhs, thresh, columns)
        }
        LyapunovHandler::QrG => {
            let win = Window::from_history(h)?;
            let m = win.m();
            let g = win.g();
            let qr = dense::pivoted_qr(&g, thresh)?;
            let s = qr.rank;
            let lead: Vec<usize> = qr.leading_perm().to_vec();
            let d_g: Vec<f64> = lead.iter().map(|&j| win.alphas[j]).collect();
            let r_g = qr.r_leading();
            let e = scale_columns_inv(&r_g, &d_g);
            // [R_Gᵀ [R_G R_12] Πᵀ,  Π_Gᵀ Gᵀ g] K, then the Π_G columns.
            let rr = r_g.transpose() * qr.r_top();
            let mut x = DMatrix::zeros(s, m + 1);
            for j in 0..m {
                x.set_column(qr.perm[j], &rr.column(j));
            }
            let g_next = win.g_next();
            for (i, &j) in lead.iter().enumerate() {
                x[(i, m)] = g.column(j).dot(&g_next);
            }
            let xk = x * build_k(m);
            let sel = DMatrix::from_fn(s, s, |i, j| xk[(i, lead[j])]);
            let sty = -scale_rows_inv(&sel, &d_g);
            let rhs = &sty + sty.transpose();
            solve_projected_lyapunov(e, rhs, thresh, lead)
        }
        LyapunovHandler::SvdS => {
            let win = Window::from_history(h)?;
            let m = win.m();
            let s_mat = win.s();
            let sv = dense::svd(&s_mat, thresh.sqrt())?;
            let k = sv.rank;
            // Uᵀ Y = [-Σ Vᵀ D, Uᵀ g] K
            let mut x = DMatrix::zeros(k, m + 1);
            for i in 0..k {
                for j in 0..m {
                    x[(i, j)] = -sv.sigma[i] * sv.v[(j, i)] * win.alphas[j];
                }
            }
            x.set_column(m, &(sv.u.transpose() * win.g_next()));
            let uty = x * build_k(m);
            let sigma_d = DMatrix::from_diagonal(&DVector::from_row_slice(&sv.sigma));
            let half = &sigma_d * uty * &sv.v;
            let f_s = &half + half.transpose();
            let b_e = dense::sym_part(&dense::lyap_diag_solve(&sv.sigma, &f_s));
            // In full coordinates F = SᵀY + YᵀS.
            let sty = s_mat.transpose() * win.y();
            let rhs = &sty + sty.transpose();
            Ok(LyapunovSystem { e: s_mat, rhs, sigma: sv.sigma, v: sv.v, b_e, columns: (0..m).collect() })
        }
    }
}

/// Stepsizes from the symmetric secant solution `B`: inverses of its
/// eigenvalues.
pub fn lyapunov_secant(h: &SweepHistory, handler: LyapunovHandler, thresh: f64) -> Result<StepStack, EngineError> {
    stack_from_inverse(&lyapunov_system(h, handler, thresh)?.eigenvalues()?)
}

/// The inverse-secant system `YᵀY H + H YᵀY = YᵀS + SᵀY` with `E = R_ext K`.
pub fn lyapunov_system_h(h: &SweepHistory, thresh: f64) -> Result<LyapunovSystem, EngineError> {
    let win = Window::from_history(h)?;
    let m = win.m();
    let (d, rext) = cholesky_dropping(&win.gram(), m, true)?;
    let k = m - d;
    let alphas = &win.alphas[d..];
    let e = &rext * build_k(k);
    let r = rext.view((0, 0), (k, k)).into_owned();
    let r_top = rext.rows(0, k).into_owned();
    let sty = -scale_rows_inv(&(r.transpose() * r_top * build_k(k)), alphas);
    let rhs = &sty + sty.transpose();
    solve_projected_lyapunov(e, rhs, thresh, (d..m).collect())
}

/// Stepsizes are the eigenvalues of the inverse-secant solution directly.
pub fn lyapunov_secant_h(h: &SweepHistory, thresh: f64) -> Result<StepStack, EngineError> {
    stack_from_direct(&lyapunov_system_h(h, thresh)?.eigenvalues()?)
}

/// `M = T + R⁻ᵀ D Lᵀ D R⁻¹` where `L` is the strictly lower part of
/// `SᵀY - YᵀS`, symmetrized.
pub fn schnabel_matrix(h: &SweepHistory) -> Result<ProjectedMatrix, EngineError> {
    let ft = fletcher_t(h)?;
    let sty = sty_cholesky(&ft);
    let l = dense::strict_lower(&(&sty - sty.transpose()));
    let d = DMatrix::from_diagonal(&DVector::from_row_slice(&ft.alphas));
    let inner = &d * l.transpose() * &d;
    let left = dense::solve_upper_transpose(&ft.r, &inner)?;
    let corr = dense::right_solve_upper(&left, &ft.r)?;
    Ok(ProjectedMatrix::new(dense::sym_part(&(&ft.t + corr)), BasisKind::Perturbed, false))
}

pub fn schnabel_pert(h: &SweepHistory) -> Result<StepStack, EngineError> {
    schnabel_matrix(h)?.to_stack()
}

/// Minimum-norm `ΔY = S (SᵀS)⁻¹ Lᵀ` making `Sᵀ(Y + ΔY)` symmetric, computed
/// from explicit `S` and `Y`.
pub fn schnabel_perturbation(h: &SweepHistory) -> Result<Perturbation, EngineError> {
    let win = Window::from_history(h)?;
    let ft = fletcher_t(h)?;
    let win = win.drop_oldest(ft.dropped);
    let s = win.s();
    let y = win.y();
    let sty = s.transpose() * &y;
    let l = dense::strict_lower(&(&sty - sty.transpose()));
    let sts = s.transpose() * &s;
    let rs = dense::cholesky(&sts)?;
    let coef = dense::solve_upper(&rs, &dense::solve_upper_transpose(&rs, &l.transpose())?)?;
    let delta_y = &s * coef;
    perturbation(s, y, delta_y, None)
}
