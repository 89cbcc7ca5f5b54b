#![allow(dead_code)]

use lmsd::history::SweepHistory;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform spectrum in `[1, kappa]` with both ends attained.
pub fn spectrum(n: usize, kappa: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|i| match i {
            0 => 1.0,
            _ if i == n - 1 => kappa,
            _ => (rng.gen::<f64>() * kappa.ln()).exp(),
        })
        .collect()
}

/// A random orthogonal matrix from the QR factor of a Gaussian-ish matrix.
pub fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// `Q diag(λ) Qᵀ` with a random orthogonal `Q`.
pub fn spd_with_spectrum(eigs: &[f64], rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = eigs.len();
    let q = orthogonal(n, rng);
    let a = &q * DMatrix::from_diagonal(&DVector::from_row_slice(eigs)) * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// A history of `m` gradient steps on `½xᵀAx` with inverse stepsizes drawn
/// uniformly inside the spectrum, starting from a random point.
pub fn quadratic_history(a: &DMatrix<f64>, m: usize, rng: &mut ChaCha8Rng) -> SweepHistory {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let mut x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut h = SweepHistory::new(m);
    let mut g = a * &x;
    h.push(g.clone(), 1.0);
    for _ in 0..m {
        let alpha = rng.gen_range(lo..hi);
        x -= &g / alpha;
        g = a * &x;
        h.push(g.clone(), alpha);
    }
    h
}

/// Gradient of `½xᵀAx + ¼Σ c_i x_i⁴`, a nonquadratic objective with a
/// varying symmetric Hessian.
pub fn quartic_gradient(a: &DMatrix<f64>, c: &[f64], x: &DVector<f64>) -> DVector<f64> {
    a * x + DVector::from_fn(x.len(), |i, _| c[i] * x[i].powi(3))
}

/// A history of `m` gradient steps on the quartic objective above. The
/// inverse stepsizes exceed half the largest curvature met near the start,
/// so the iterates stay bounded.
pub fn nonquadratic_history(n: usize, m: usize, rng: &mut ChaCha8Rng) -> SweepHistory {
    let eigs = spectrum(n, 20.0, rng);
    let a = spd_with_spectrum(&eigs, rng);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let mut x = DVector::from_fn(n, |_, _| rng.gen_range(-0.6..0.6));
    let mut h = SweepHistory::new(m);
    let mut g = quartic_gradient(&a, &c, &x);
    h.push(g.clone(), 1.0);
    for _ in 0..m {
        let alpha = rng.gen_range(12.0..40.0);
        x -= &g / alpha;
        g = quartic_gradient(&a, &c, &x);
        h.push(g.clone(), alpha);
    }
    h
}

/// Orthonormal basis of the column space via nalgebra's Householder QR.
pub fn orth(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}

/// Ascending eigenvalues of a symmetric matrix via nalgebra directly.
pub fn eigs(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = ((m + m.transpose()) * 0.5).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn assert_close(got: &[f64], want: &[f64], rel: f64, what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: length {got:?} vs {want:?}");
    let scale = want.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= rel * scale.max(w.abs()), "{what}: {got:?} vs {want:?}");
    }
}

/// `1/v` for each entry, sorted ascending.
pub fn inverses(v: &[f64]) -> Vec<f64> {
    sorted(v.iter().map(|x| 1.0 / x).collect())
}
