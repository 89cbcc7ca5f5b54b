//! Small dense kernels shared by every stepsize engine.
//!
//! All matrices here are at most `(m+1) x (m+1)` except the tall `n x m`
//! inputs to [`pivoted_qr`] and [`svd`]. Storage is plain `nalgebra`
//! [`DMatrix`]; nothing exploits sparsity or band structure.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use thiserror::Error;

/// Relative pivot size below which a Cholesky factorization is rejected.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-14;

/// Column norms at or below this value count as exactly zero.
pub const UNDERFLOW_GUARD: f64 = 1e-300;

const TIE_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not numerically positive definite (pivot {pivot:e} at index {index})")]
    NotSpd { index: usize, pivot: f64 },
    #[error("all columns are numerically zero")]
    ZeroMatrix,
    #[error("iterative decomposition did not converge")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Upper triangular `R` with `RᵀR = M`.
///
/// A pivot `d_j <= 1e-14 * max_i M[i,i]` (or a non-finite pivot) is reported
/// as [`LinalgError::NotSpd`] with the failing index.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = m.nrows();
    if k == 0 || m.ncols() != k {
        return Err(LinalgError::Dimension(format!(
            "cholesky needs a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let max_diag = (0..k).map(|i| m[(i, i)]).fold(0.0_f64, f64::max);
    let floor = CHOLESKY_PIVOT_TOL * max_diag;
    let mut r = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        let mut d = m[(j, j)];
        for p in 0..j {
            d -= r[(p, j)] * r[(p, j)];
        }
        if !d.is_finite() || d <= floor || d <= 0.0 {
            return Err(LinalgError::NotSpd { index: j, pivot: d });
        }
        let rjj = d.sqrt();
        r[(j, j)] = rjj;
        for i in (j + 1)..k {
            let mut v = m[(j, i)];
            for p in 0..j {
                v -= r[(p, j)] * r[(p, i)];
            }
            r[(j, i)] = v / rjj;
        }
    }
    Ok(r)
}

/// Column-pivoted Householder QR: `M Π = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// `n x k` with orthonormal columns, `k = min(n, m)`.
    pub q: DMatrix<f64>,
    /// `k x m` upper triangular, `|R[i,i]|` nonincreasing.
    pub r: DMatrix<f64>,
    /// `perm[j]` is the original index of the `j`-th pivoted column.
    pub perm: Vec<usize>,
    /// Number of leading diagonal entries with `|R[i,i]| > thresh * |R[0,0]|`.
    pub rank: usize,
}

impl PivotedQr {
    /// Leading `s x s` block `R_G` of the partition `[[R_G, R_12], [0, R_22]]`.
    pub fn r_leading(&self) -> DMatrix<f64> {
        self.r.view((0, 0), (self.rank, self.rank)).into_owned()
    }

    /// First `s` rows of `R`, i.e. `[R_G R_12]`.
    pub fn r_top(&self) -> DMatrix<f64> {
        self.r.rows(0, self.rank).into_owned()
    }

    pub fn q_leading(&self) -> DMatrix<f64> {
        self.q.columns(0, self.rank).into_owned()
    }

    pub fn leading_perm(&self) -> &[usize] {
        &self.perm[..self.rank]
    }

    /// Crude condition estimate `|r_1| / |r_s|` of the retained block.
    pub fn condition_estimate(&self) -> f64 {
        self.r[(0, 0)].abs() / self.r[(self.rank - 1, self.rank - 1)].abs()
    }
}

/// Column-pivoted QR, picking the remaining column of largest norm at each
/// step. Ties (within 1e-14 relative) go to the lowest original index.
pub fn pivoted_qr(m: &DMatrix<f64>, thresh: f64) -> Result<PivotedQr> {
    let (n, cols) = m.shape();
    if n == 0 || cols == 0 {
        return Err(LinalgError::Dimension("pivoted_qr needs a nonempty matrix".into()));
    }
    let k = n.min(cols);
    let mut work = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut reflectors: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut steps = 0;

    for j in 0..k {
        // exact remaining norms; m is small so no downdating
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..cols {
            let norm = work.view((j, c), (n - j, 1)).norm();
            let tied = (norm - best_norm).abs() <= TIE_TOL * best_norm;
            let better = best_norm < 0.0 || (tied && perm[c] < perm[best]) || (!tied && norm > best_norm);
            if better {
                best = c;
                best_norm = norm;
            }
        }
        if best_norm <= UNDERFLOW_GUARD {
            if j == 0 {
                return Err(LinalgError::ZeroMatrix);
            }
            break;
        }
        if best != j {
            work.swap_columns(j, best);
            perm.swap(j, best);
        }
        let x = work.column(j).rows(j, n - j).into_owned();
        let alpha = if x[0] >= 0.0 { -best_norm } else { best_norm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm2 = v.norm_squared();
        if vnorm2 > 0.0 {
            let tail = work.view((j, j), (n - j, cols - j)).into_owned();
            let proj = v.transpose() * &tail;
            let update = &v * proj * (2.0 / vnorm2);
            let mut block = work.view_mut((j, j), (n - j, cols - j));
            block -= update;
        }
        work[(j, j)] = alpha;
        for i in (j + 1)..n {
            work[(i, j)] = 0.0;
        }
        reflectors.push(v);
        steps += 1;
    }

    let mut r = DMatrix::<f64>::zeros(k, cols);
    for i in 0..steps {
        for c in i..cols {
            r[(i, c)] = work[(i, c)];
        }
    }

    // Q = H_0 H_1 ... H_{steps-1} applied to the first k columns of I
    let mut q = DMatrix::<f64>::identity(n, k);
    for (j, v) in reflectors.iter().enumerate().rev() {
        let vnorm2 = v.norm_squared();
        if vnorm2 == 0.0 {
            continue;
        }
        let sub = q.view((j, 0), (n - j, k)).into_owned();
        let proj = v.transpose() * &sub;
        let update = v * proj * (2.0 / vnorm2);
        let mut block = q.view_mut((j, 0), (n - j, k));
        block -= update;
    }

    let r0 = r[(0, 0)].abs();
    let rank = (0..steps).take_while(|&i| r[(i, i)].abs() > thresh * r0).count().max(1);
    Ok(PivotedQr { q, r, perm, rank })
}

/// Truncated singular value decomposition `M ≈ U diag(σ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `n x s`
    pub u: DMatrix<f64>,
    /// `s` retained singular values, nonincreasing.
    pub sigma: Vec<f64>,
    /// `m x s`
    pub v: DMatrix<f64>,
    pub rank: usize,
    /// Every computed singular value, nonincreasing.
    pub all_sigma: Vec<f64>,
}

/// Retains the singular triplets with `σ_i >= thresh * σ_1`.
pub fn svd(m: &DMatrix<f64>, thresh: f64) -> Result<SvdResult> {
    let (n, cols) = m.shape();
    if n == 0 || cols == 0 {
        return Err(LinalgError::Dimension("svd needs a nonempty matrix".into()));
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NoConvergence);
    }
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, MAX_SWEEPS).ok_or(LinalgError::NoConvergence)?;
    let u_full = dec.u.ok_or(LinalgError::NoConvergence)?;
    let vt_full = dec.v_t.ok_or(LinalgError::NoConvergence)?;
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]).then(a.cmp(&b)));
    let all_sigma: Vec<f64> = order.iter().map(|&i| dec.singular_values[i]).collect();
    let s1 = all_sigma[0];
    if !(s1 > UNDERFLOW_GUARD) {
        return Err(LinalgError::ZeroMatrix);
    }
    let rank = all_sigma.iter().take_while(|&&s| s >= thresh * s1).count().max(1);
    let mut u = DMatrix::<f64>::zeros(n, rank);
    let mut v = DMatrix::<f64>::zeros(cols, rank);
    for (c, &i) in order.iter().take(rank).enumerate() {
        u.set_column(c, &u_full.column(i));
        v.set_column(c, &vt_full.row(i).transpose());
    }
    Ok(SvdResult { u, sigma: all_sigma[..rank].to_vec(), v, rank, all_sigma })
}

/// Spectral norm via the largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    Ok(svd(m, 1.0)?.all_sigma[0])
}

/// Symmetric eigendecomposition: eigenvalues ascending, eigenvectors as
/// orthonormal columns in matching order. The input is symmetrized first.
pub fn sym_eig(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = m.nrows();
    if k == 0 || m.ncols() != k {
        return Err(LinalgError::Dimension("sym_eig needs a nonempty square matrix".into()));
    }
    if !m.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::NoConvergence);
    }
    let sym = sym_part(m);
    let dec = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS).ok_or(LinalgError::NoConvergence)?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]).then(a.cmp(&b)));
    let vals = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(k, k);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &dec.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Symmetric-definite pencil `A c = λ B c` by Cholesky reduction.
/// Eigenvectors are returned `B`-orthonormal.
pub fn sym_definite_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if a.shape() != b.shape() {
        return Err(LinalgError::Dimension("pencil blocks differ in shape".into()));
    }
    let r = cholesky(b)?;
    // C = R⁻ᵀ A R⁻¹
    let left = solve_upper_transpose(&r, &sym_part(a))?;
    let c = right_solve_upper(&left, &r)?;
    let (vals, z) = sym_eig(&c)?;
    let vecs = solve_upper(&r, &z)?;
    Ok((vals, vecs))
}

/// Eigenvalues (ascending) of `B⁻¹A` for symmetric `A` and SPD `B`.
///
/// The Cholesky reduction loses accuracy in proportion to the conditioning of
/// `B`; each eigenvalue is therefore recomputed as the Rayleigh quotient
/// `cᵀAc / cᵀBc` of its eigenvector, whose error is quadratic in that of `c`.
pub fn generalized_eig_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (_, vecs) = sym_definite_eig(a, b)?;
    let a = sym_part(a);
    let quad = |m: &DMatrix<f64>, c: &[f64]| {
        let mc: Vec<f64> = m.row_iter().map(|row| dot2(&row.iter().copied().collect::<Vec<_>>(), c)).collect();
        dot2(c, &mc)
    };
    let mut vals: Vec<f64> = vecs.column_iter().map(|c| quad(&a, c.as_slice()) / quad(b, c.as_slice())).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Dot product evaluated as if in twice the working precision
/// (compensated summation of error-free products).
pub fn dot2(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "dot2 operands differ in length");
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        let p = a * b;
        let perr = a.mul_add(*b, -p);
        let t = hi + p;
        let z = t - hi;
        lo += (hi - (t - z)) + (p - z) + perr;
        hi = t;
    }
    hi + lo
}

/// `XᵀY` with every entry from [`dot2`].
pub fn gram2(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(x.nrows(), y.nrows(), "gram2 operands differ in height");
    DMatrix::from_fn(x.ncols(), y.ncols(), |i, j| dot2(x.column(i).as_slice(), y.column(j).as_slice()))
}

/// Solution of `diag(σ²) B + B diag(σ²) = F`, by elementwise division.
pub fn lyap_diag_solve(sigma: &[f64], f: &DMatrix<f64>) -> DMatrix<f64> {
    let s = sigma.len();
    assert_eq!(f.shape(), (s, s), "rhs must be {s}x{s}");
    let sq: Vec<f64> = sigma.iter().map(|v| v * v).collect();
    DMatrix::from_fn(s, s, |i, j| f[(i, j)] / (sq[i] + sq[j]))
}

/// `R X = B` for upper triangular `R`.
pub fn solve_upper(r: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    r.solve_upper_triangular(b).ok_or(LinalgError::NotSpd { index: 0, pivot: 0.0 })
}

/// `Rᵀ X = B` for upper triangular `R`.
pub fn solve_upper_transpose(r: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    r.tr_solve_upper_triangular(b).ok_or(LinalgError::NotSpd { index: 0, pivot: 0.0 })
}

/// `M R⁻¹` for upper triangular `R`.
pub fn right_solve_upper(m: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    solve_upper_transpose(r, &m.transpose()).map(|x| x.transpose())
}

/// `½ (M + Mᵀ)`
pub fn sym_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Replaces the strict upper triangle by the transpose of the strict lower one.
pub fn sym_from_lower(m: &DMatrix<f64>) -> DMatrix<f64> {
    let k = m.nrows();
    DMatrix::from_fn(k, k, |i, j| if i >= j { m[(i, j)] } else { m[(j, i)] })
}

/// Strictly lower triangular part.
pub fn strict_lower(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i > j { m[(i, j)] } else { 0.0 })
}

/// Strictly upper triangular part.
pub fn strict_upper(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if j > i { m[(i, j)] } else { 0.0 })
}

/// Frobenius norm of the entries farther than `bandwidth` from the diagonal.
pub fn off_band_norm(m: &DMatrix<f64>, bandwidth: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i.abs_diff(j) > bandwidth {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}
