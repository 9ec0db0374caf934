//! Small dense linear-algebra helpers on column slices.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Dot product with four independent accumulators, so the compiler can vectorize it.
fn dot_lanes(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// In-place Cholesky of a symmetric positive definite matrix stored row-major
/// (`k x k`). Returns `false` if a pivot is not positive.
fn cholesky_in_place(a: &mut [f64], k: usize) -> bool {
    for j in 0..k {
        let row_j = &a[j * k..j * k + j];
        let d = a[j * k + j] - dot_lanes(row_j, row_j);
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * k + j] = d;
        let (head, tail) = a.split_at_mut((j + 1) * k);
        let row_j = &head[j * k..j * k + j];
        for row_i in tail.chunks_exact_mut(k) {
            row_i[j] = (row_i[j] - dot_lanes(&row_i[..j], row_j)) / d;
        }
    }
    true
}

fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        b[i] = (b[i] - dot_lanes(&l[i * k..i * k + i], &b[..i])) / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for l_idx in (i + 1)..k {
            s -= l[l_idx * k + i] * b[l_idx];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Solves `(A + ridge I) x = b` for symmetric `A` (row-major, `k x k`).
///
/// When the factorization fails or the pivots are numerically degenerate,
/// retries with jitter `1e-10 * trace(A) / k`, growing tenfold until it succeeds.
pub(crate) fn solve_spd(a: &[f64], k: usize, b: &[f64], ridge: f64) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let trace: f64 = (0..k).map(|i| a[i * k + i]).sum();
    let scale = if trace > 0.0 { trace / k as f64 } else { 1.0 };
    let mut jitter = 0.0;
    loop {
        let mut m = a.to_vec();
        for i in 0..k {
            m[i * k + i] += ridge + jitter;
        }
        if cholesky_in_place(&mut m, k) && well_conditioned(&m, k) {
            let mut x = b.to_vec();
            cholesky_solve(&m, k, &mut x);
            if x.iter().all(|v| v.is_finite()) {
                return x;
            }
        }
        jitter = if jitter == 0.0 { 1e-10 * scale } else { jitter * 10.0 };
        if jitter > 1e6 * scale {
            return vec![0.0; k];
        }
    }
}

/// Solves `A x = b` for symmetric positive semi-definite `A`, adding the
/// smallest jitter (from `1e-12 * trace(A) / k`, tenfold steps) that factors.
pub(crate) fn solve_psd(a: &[f64], k: usize, b: &[f64]) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let trace: f64 = (0..k).map(|i| a[i * k + i]).sum();
    let scale = if trace > 0.0 { trace / k as f64 } else { 1.0 };
    let mut jitter = 0.0;
    loop {
        let mut m = a.to_vec();
        for i in 0..k {
            m[i * k + i] += jitter;
        }
        if cholesky_in_place(&mut m, k) {
            let mut x = b.to_vec();
            cholesky_solve(&m, k, &mut x);
            if x.iter().all(|v| v.is_finite()) {
                return x;
            }
        }
        jitter = if jitter == 0.0 { 1e-12 * scale } else { jitter * 10.0 };
        if jitter > 1e6 * scale {
            return vec![0.0; k];
        }
    }
}

fn well_conditioned(l: &[f64], k: usize) -> bool {
    let diag = (0..k).map(|i| l[i * k + i]);
    let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    // pivot ratio squared approximates the conditioning of the normal equations
    lo > 0.0 && (hi / lo) < 1e7
}

/// Least-squares coefficients of `y` on the given columns via ridge-guarded normal equations.
pub(crate) fn least_squares(columns: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let k = columns.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        rhs[i] = dot(columns[i], y);
        for j in 0..=i {
            let v = dot(columns[i], columns[j]);
            gram[i * k + j] = v;
            gram[j * k + i] = v;
        }
    }
    solve_spd(&gram, k, &rhs, 0.0)
}

/// Residual sum of squares of `y` after fitting `coef` on `columns`.
pub(crate) fn rss(columns: &[&[f64]], coef: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..y.len() {
        let mut fit = 0.0;
        for (c, b) in columns.iter().zip(coef) {
            fit += c[i] * b;
        }
        let r = y[i] - fit;
        total += r * r;
    }
    total
}

/// Incrementally grown orthonormal basis (modified Gram-Schmidt with one
/// re-orthogonalization pass) together with the residual of a response.
#[derive(Debug, Clone)]
pub(crate) struct OrthoBasis {
    pub q: Vec<Vec<f64>>,
    pub resid: Vec<f64>,
}

/// Columns whose orthogonal remainder is below this fraction of their norm are
/// treated as already spanned.
pub(crate) const DEPENDENCE_TOL: f64 = 1e-10;

impl OrthoBasis {
    pub fn new(response: &[f64]) -> Self {
        Self {
            q: Vec::new(),
            resid: response.to_vec(),
        }
    }

    pub fn rss(&self) -> f64 {
        norm_sq(&self.resid)
    }

    /// Orthogonal remainder of `v` against the current basis.
    pub fn remainder(&self, v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in &self.q {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        w
    }

    /// Adds `v` to the span; returns false when it was already (numerically) spanned.
    pub fn push(&mut self, v: &[f64]) -> bool {
        let total = norm_sq(v);
        if total == 0.0 {
            return false;
        }
        let mut w = self.remainder(v);
        let rem = norm_sq(&w);
        if rem <= DEPENDENCE_TOL * total {
            return false;
        }
        let inv = 1.0 / rem.sqrt();
        w.iter_mut().for_each(|x| *x *= inv);
        let c = dot(&w, &self.resid);
        for (r, qi) in self.resid.iter_mut().zip(&w) {
            *r -= c * qi;
        }
        self.q.push(w);
        true
    }
}
