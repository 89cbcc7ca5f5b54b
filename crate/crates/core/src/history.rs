//! Rolling memory of recent gradients and the inverse stepsizes that link them.
//!
//! With gradients `g_1, …, g_{m+1}` (oldest first) and inverse stepsizes
//! `α_1, …, α_m`, where `g_{i+1} = ∇f(x_i - g_i / α_i)`, the history assembles
//! `G = [g_1 … g_m]`, `S = -G D⁻¹`, `Y = [G g_{m+1}] K` and the bidiagonal
//! factors `J`, `J̃` used by the engines.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct SweepHistory {
    capacity: usize,
    gradients: VecDeque<DVector<f64>>,
    inv_steps: VecDeque<f64>,
}

impl SweepHistory {
    /// History that keeps at most `capacity + 1` gradients.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "memory parameter must be at least 1");
        Self {
            capacity,
            gradients: VecDeque::with_capacity(capacity + 2),
            inv_steps: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of stored gradients.
    pub fn len(&self) -> usize {
        self.gradients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gradients.is_empty()
    }

    /// Number of complete `(g_i, α_i)` columns, i.e. the width of `G`.
    pub fn columns(&self) -> usize {
        self.inv_steps.len()
    }

    pub fn gradients(&self) -> impl ExactSizeIterator<Item = &DVector<f64>> {
        self.gradients.iter()
    }

    pub fn inv_steps(&self) -> Vec<f64> {
        self.inv_steps.iter().copied().collect()
    }

    pub fn newest(&self) -> Option<&DVector<f64>> {
        self.gradients.back()
    }

    pub fn clear(&mut self) {
        self.gradients.clear();
        self.inv_steps.clear();
    }

    /// Appends `g_new`, reached from the previous gradient with inverse
    /// stepsize `alpha_used`. On an empty history `alpha_used` is ignored.
    pub fn push(&mut self, g_new: DVector<f64>, alpha_used: f64) {
        debug_assert!(g_new.iter().all(|v| v.is_finite()));
        if !self.gradients.is_empty() {
            assert!(alpha_used > 0.0 && alpha_used.is_finite(), "inverse stepsize must be positive");
            self.inv_steps.push_back(alpha_used);
        }
        self.gradients.push_back(g_new);
        while self.gradients.len() > self.capacity + 1 {
            self.gradients.pop_front();
            self.inv_steps.pop_front();
        }
    }

    /// Keeps only the `s` most recent columns of `G` (plus the newest gradient).
    pub fn keep_last(&mut self, s: usize) {
        while self.inv_steps.len() > s {
            self.gradients.pop_front();
            self.inv_steps.pop_front();
        }
    }

    pub fn build_j(&self) -> DMatrix<f64> {
        build_j(&self.inv_steps())
    }

    pub fn build_k(&self) -> DMatrix<f64> {
        build_k(self.columns())
    }

    pub fn build_jtilde(&self) -> DMatrix<f64> {
        build_jtilde(&self.inv_steps())
    }

    /// `[G g_{m+1}]`, an `n x (m+1)` matrix.
    pub fn extended_matrix(&self) -> DMatrix<f64> {
        let n = self.gradients.front().map_or(0, |g| g.len());
        let mut out = DMatrix::zeros(n, self.gradients.len());
        for (j, g) in self.gradients.iter().enumerate() {
            out.set_column(j, g);
        }
        out
    }

    /// `(G, g_{m+1}, S, Y, D)`. Panics with fewer than two gradients.
    pub fn assemble(&self) -> Assembled {
        assert!(self.len() >= 2, "assembly needs at least two gradients");
        let m = self.columns();
        let ext = self.extended_matrix();
        let g = ext.columns(0, m).into_owned();
        let g_next = ext.column(m).into_owned();
        let alphas = self.inv_steps();
        let mut s = g.clone();
        for (j, a) in alphas.iter().enumerate() {
            s.column_mut(j).scale_mut(-1.0 / a);
        }
        let y = &ext * build_k(m);
        let d = DMatrix::from_diagonal(&DVector::from_vec(alphas));
        Assembled { g, g_next, s, y, d }
    }
}

/// The matrices derived from a full history.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub g: DMatrix<f64>,
    pub g_next: DVector<f64>,
    pub s: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

/// `(m+1) x m` lower bidiagonal `J` with `J[i,i] = α_i`, `J[i+1,i] = -α_i`,
/// so that `A G = [G g_{m+1}] J` on quadratics.
pub fn build_j(alphas: &[f64]) -> DMatrix<f64> {
    let m = alphas.len();
    let mut j = DMatrix::zeros(m + 1, m);
    for (i, &a) in alphas.iter().enumerate() {
        j[(i, i)] = a;
        j[(i + 1, i)] = -a;
    }
    j
}

/// `(m+1) x m` difference operator with `Y = [G g_{m+1}] K`.
pub fn build_k(m: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(m + 1, m);
    for i in 0..m {
        k[(i, i)] = -1.0;
        k[(i + 1, i)] = 1.0;
    }
    k
}

/// `(m+1) x m` lower-triangular ones pattern times `D⁻¹`, so that
/// `A⁻¹ Y = [Y  -g_{m+1}] J̃` on quadratics.
pub fn build_jtilde(alphas: &[f64]) -> DMatrix<f64> {
    let m = alphas.len();
    DMatrix::from_fn(m + 1, m, |i, j| if i >= j { 1.0 / alphas[j] } else { 0.0 })
}
