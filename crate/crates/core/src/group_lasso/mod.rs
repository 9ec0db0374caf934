//! Group LASSO with orthogonal within-group columns.
//!
//! Minimizes
//!
//! ```text
//! sum_i (y_i - sum_g X_g beta_g)^2 + lambda * sum_{g penalized} ||beta_g||_2
//! ```
//!
//! by block coordinate descent. Columns inside a group are orthogonal (for the
//! treatment/control blocks they have disjoint supports), so every block update
//! has a diagonal Gram matrix and reduces to a scalar root-find on `||beta_g||`.
//! A block is exactly zero when `||X_g' r||_2 <= lambda / 2`.
//!
//! Penalized columns are scaled to unit root-mean-square before solving and the
//! returned coefficients are mapped back to the original scale.

mod path;

pub use path::{fit_path_cv, lambda_path, CvPoint, CvResult, PathConfig};
pub(crate) use path::stratified_folds;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, least_squares, solve_psd};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Column blocks for the group-LASSO problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDesign {
    n: usize,
    columns: Vec<Vec<f64>>,
    groups: Vec<Vec<usize>>,
    penalized: Vec<bool>,
    /// Divisor applied to each raw column before solving.
    scale: Vec<f64>,
    standardize: bool,
}

impl GroupedDesign {
    /// General constructor; `groups[g]` lists column indices of group `g`.
    pub fn new(
        columns: Vec<Vec<f64>>,
        groups: Vec<Vec<usize>>,
        unpenalized: &[usize],
        standardize: bool,
    ) -> Result<Self> {
        let n = columns.first().map(Vec::len).unwrap_or(0);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("design columns differ in length".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design contains non-finite values".into()));
        }
        let mut seen = vec![false; columns.len()];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidInput("empty group".into()));
            }
            for &k in g {
                if k >= columns.len() || seen[k] {
                    return Err(Error::InvalidInput(format!(
                        "column {k} is out of range or assigned to two groups"
                    )));
                }
                seen[k] = true;
            }
            for (a, &ka) in g.iter().enumerate() {
                for &kb in &g[a + 1..] {
                    let (ca, cb) = (&columns[ka], &columns[kb]);
                    let cross = dot(ca, cb).abs();
                    let bound = 1e-12 * (dot(ca, ca) * dot(cb, cb)).sqrt();
                    if cross > bound {
                        return Err(Error::InvalidInput(format!(
                            "columns {ka} and {kb} in one group are not orthogonal"
                        )));
                    }
                }
            }
        }
        let mut penalized = vec![true; groups.len()];
        for &u in unpenalized {
            if u >= groups.len() {
                return Err(Error::InvalidInput(format!("unpenalized group {u} does not exist")));
            }
            penalized[u] = false;
        }
        let mut design = Self {
            n,
            columns,
            groups,
            penalized,
            scale: Vec::new(),
            standardize,
        };
        design.scale = design.compute_scale();
        Ok(design)
    }

    /// Two-column blocks `(h_g·1[t=1], h_g·1[t=0])` for each basis column `h_g`.
    pub fn treatment_blocks(
        basis_columns: &[Vec<f64>],
        treatment: &[u8],
        unpenalized: &[usize],
        standardize: bool,
    ) -> Result<Self> {
        let mut columns = Vec::with_capacity(2 * basis_columns.len());
        let mut groups = Vec::with_capacity(basis_columns.len());
        for h in basis_columns {
            if h.len() != treatment.len() {
                return Err(Error::DimensionMismatch {
                    expected: treatment.len(),
                    got: h.len(),
                });
            }
            let treated = h.iter().zip(treatment).map(|(v, &t)| if t == 1 { *v } else { 0.0 });
            let control = h.iter().zip(treatment).map(|(v, &t)| if t == 0 { *v } else { 0.0 });
            groups.push(vec![columns.len(), columns.len() + 1]);
            columns.push(treated.collect());
            columns.push(control.collect());
        }
        Self::new(columns, groups, unpenalized, standardize)
    }

    /// One column per group (ordinary LASSO).
    pub fn singletons(columns: Vec<Vec<f64>>, unpenalized: &[usize], standardize: bool) -> Result<Self> {
        let groups = (0..columns.len()).map(|k| vec![k]).collect();
        Self::new(columns, groups, unpenalized, standardize)
    }

    fn compute_scale(&self) -> Vec<f64> {
        let mut scale = vec![1.0; self.columns.len()];
        if !self.standardize || self.n == 0 {
            return scale;
        }
        for (g, cols) in self.groups.iter().enumerate() {
            if !self.penalized[g] {
                continue;
            }
            for &k in cols {
                let rms = (dot(&self.columns[k], &self.columns[k]) / self.n as f64).sqrt();
                if rms > 0.0 {
                    scale[k] = rms;
                }
            }
        }
        scale
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn is_penalized(&self, g: usize) -> bool {
        self.penalized[g]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Same groups restricted to `rows`, with scales recomputed on those rows.
    pub fn subset(&self, rows: &[usize]) -> GroupedDesign {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&i| c[i]).collect())
            .collect();
        let mut d = GroupedDesign {
            n: rows.len(),
            columns,
            groups: self.groups.clone(),
            penalized: self.penalized.clone(),
            scale: Vec::new(),
            standardize: self.standardize,
        };
        d.scale = d.compute_scale();
        d
    }

    /// Drops the listed groups.
    pub fn without_groups(&self, drop: &[bool]) -> GroupedDesign {
        let mut columns = Vec::new();
        let mut groups = Vec::new();
        let mut penalized = Vec::new();
        for (g, cols) in self.groups.iter().enumerate() {
            if drop[g] {
                continue;
            }
            let mut idx = Vec::new();
            for &k in cols {
                idx.push(columns.len());
                columns.push(self.columns[k].clone());
            }
            groups.push(idx);
            penalized.push(self.penalized[g]);
        }
        let mut d = GroupedDesign {
            n: self.n,
            columns,
            groups,
            penalized,
            scale: Vec::new(),
            standardize: self.standardize,
        };
        d.scale = d.compute_scale();
        d
    }

    /// Fitted values `X beta` for original-scale group coefficients.
    pub fn predict(&self, beta: &[Vec<f64>]) -> Vec<f64> {
        let mut fit = vec![0.0; self.n];
        for (cols, b) in self.groups.iter().zip(beta) {
            for (&k, &bk) in cols.iter().zip(b) {
                if bk != 0.0 {
                    for (f, x) in fit.iter_mut().zip(&self.columns[k]) {
                        *f += bk * x;
                    }
                }
            }
        }
        fit
    }

    /// Penalized objective on the original coefficient scale of the standardized problem.
    pub fn objective(&self, y: &[f64], beta: &[Vec<f64>], lambda: f64) -> f64 {
        let fit = self.predict(beta);
        let loss: f64 = y.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum();
        let penalty: f64 = self
            .groups
            .iter()
            .zip(beta)
            .enumerate()
            .filter(|(g, _)| self.penalized[*g])
            .map(|(_, (cols, b))| {
                cols.iter()
                    .zip(b)
                    .map(|(&k, bk)| (bk * self.scale[k]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum();
        loss + lambda * penalty
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLassoSolution {
    /// Coefficients per group on the original column scale.
    pub beta: Vec<Vec<f64>>,
    pub lambda: f64,
    pub objective: f64,
    /// Largest KKT violation over groups relative to `max(lambda, lambda_max)`.
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl GroupLassoSolution {
    pub fn active_groups(&self) -> usize {
        self.beta.iter().filter(|b| b.iter().any(|v| *v != 0.0)).count()
    }
}

/// Active-set sweeps between Newton refinements.
const NEWTON_AFTER: usize = 20;
const NEWTON_STEPS: usize = 5;
const NEWTON_MAX_COLS: usize = 1200;
const NEWTON_MIN_STEP: f64 = 1e-3;
const NEWTON_MIN_DAMPING: f64 = 1e-6;

/// Working state of the standardized problem.
pub(crate) struct Solver<'a> {
    design: &'a GroupedDesign,
    /// Standardized columns.
    x: Vec<Vec<f64>>,
    d: Vec<f64>,
    y: &'a [f64],
    gamma: Vec<Vec<f64>>,
    resid: Vec<f64>,
    /// Twice the Gram matrix of the standardized columns, filled on demand.
    gram: Vec<f64>,
    /// Levenberg damping of the last accepted Newton step.
    damping: f64,
}

impl<'a> Solver<'a> {
    pub fn new(design: &'a GroupedDesign, y: &'a [f64]) -> Result<Self> {
        if y.len() != design.n {
            return Err(Error::DimensionMismatch {
                expected: design.n,
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("response contains non-finite values".into()));
        }
        let x: Vec<Vec<f64>> = design
            .columns
            .iter()
            .zip(&design.scale)
            .map(|(c, s)| c.iter().map(|v| v / s).collect())
            .collect();
        let d = x.iter().map(|c| dot(c, c)).collect();
        let gamma = design.groups.iter().map(|g| vec![0.0; g.len()]).collect();
        Ok(Self {
            design,
            x,
            d,
            y,
            gamma,
            resid: y.to_vec(),
            gram: Vec::new(),
            damping: 0.0,
        })
    }

    /// Starts from original-scale coefficients.
    pub fn warm_start(&mut self, beta: &[Vec<f64>]) {
        for (g, cols) in self.design.groups.iter().enumerate() {
            for (a, &k) in cols.iter().enumerate() {
                self.gamma[g][a] = beta[g][a] * self.design.scale[k];
            }
        }
        self.resid = self.y.to_vec();
        for (g, cols) in self.design.groups.iter().enumerate() {
            for (a, &k) in cols.iter().enumerate() {
                let v = self.gamma[g][a];
                if v != 0.0 {
                    for (r, xv) in self.resid.iter_mut().zip(&self.x[k]) {
                        *r -= v * xv;
                    }
                }
            }
        }
    }

    /// Smallest lambda at which every penalized group is zero.
    pub fn lambda_max(&self) -> f64 {
        let unpen: Vec<usize> = self
            .design
            .groups
            .iter()
            .enumerate()
            .filter(|(g, _)| !self.design.penalized[*g])
            .flat_map(|(_, cols)| cols.iter().copied())
            .collect();
        let mut r = self.y.to_vec();
        if !unpen.is_empty() {
            let cols: Vec<&[f64]> = unpen.iter().map(|&k| self.x[k].as_slice()).collect();
            let coef = least_squares(&cols, self.y);
            for (c, b) in cols.iter().zip(&coef) {
                for (ri, xi) in r.iter_mut().zip(c.iter()) {
                    *ri -= b * xi;
                }
            }
        }
        self.design
            .groups
            .iter()
            .enumerate()
            .filter(|(g, _)| self.design.penalized[*g])
            .map(|(_, cols)| {
                2.0 * cols
                    .iter()
                    .map(|&k| dot(&self.x[k], &r).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Exact minimizer of one block given the others; returns the max coefficient change.
    fn update_group(&mut self, g: usize, lambda: f64) -> f64 {
        let cols = &self.design.groups[g];
        let s: Vec<f64> = cols
            .iter()
            .enumerate()
            .map(|(a, &k)| dot(&self.x[k], &self.resid) + self.d[k] * self.gamma[g][a])
            .collect();
        let dk: Vec<f64> = cols.iter().map(|&k| self.d[k]).collect();
        let new = if self.design.penalized[g] {
            block_solution(&s, &dk, lambda)
        } else {
            block_solution(&s, &dk, 0.0)
        };
        let mut change: f64 = 0.0;
        for (a, &k) in cols.iter().enumerate() {
            let delta = new[a] - self.gamma[g][a];
            if delta != 0.0 {
                for (r, xv) in self.resid.iter_mut().zip(&self.x[k]) {
                    *r -= delta * xv;
                }
                change = change.max(delta.abs());
            }
            self.gamma[g][a] = new[a];
        }
        change
    }

    fn is_zero(&self, g: usize) -> bool {
        self.gamma[g].iter().all(|v| *v == 0.0)
    }

    /// Block coordinate descent with active-set cycling.
    pub fn run(&mut self, lambda: f64, tol: f64, max_iter: usize) -> Result<GroupLassoSolution> {
        let lambda_max = self.lambda_max();
        let g_count = self.design.groups.len();
        let mut sweeps = 0;
        loop {
            // full sweep
            let mut change: f64 = 0.0;
            for g in 0..g_count {
                change = change.max(self.update_group(g, lambda));
            }
            sweeps += 1;
            // cycle over the active set until it settles
            let mut since_newton = 0;
            while change >= tol && sweeps < max_iter {
                if since_newton == NEWTON_AFTER {
                    self.newton_refine(lambda, tol);
                    since_newton = 0;
                }
                since_newton += 1;
                change = 0.0;
                for g in 0..g_count {
                    if !self.is_zero(g) || !self.design.penalized[g] {
                        change = change.max(self.update_group(g, lambda));
                    }
                }
                sweeps += 1;
            }
            let kkt = self.kkt(lambda, lambda_max);
            if change < tol && kkt <= tol {
                return Ok(self.solution(lambda, kkt, sweeps));
            }
            if change < tol {
                self.newton_refine(lambda, tol);
            }
            if sweeps >= max_iter {
                if kkt <= tol {
                    return Ok(self.solution(lambda, kkt, sweeps));
                }
                return Err(Error::Convergence {
                    solver: "group lasso",
                    iterations: sweeps,
                    residual: kkt,
                });
            }
        }
    }

    pub fn rss(&self) -> f64 {
        dot(&self.resid, &self.resid)
    }

    /// Penalized objective of the standardized problem at the current state.
    fn current_objective(&self, lambda: f64) -> f64 {
        let penalty: f64 = self
            .gamma
            .iter()
            .zip(&self.design.penalized)
            .filter(|(_, p)| **p)
            .map(|(b, _)| b.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        dot(&self.resid, &self.resid) + lambda * penalty
    }

    /// Damped Newton steps on the objective restricted to the nonzero groups
    /// (plus unpenalized ones). Zero groups stay zero; sweeps handle entry and exit.
    fn newton_refine(&mut self, lambda: f64, tol: f64) {
        let slots: Vec<(usize, usize, usize)> = self
            .design
            .groups
            .iter()
            .enumerate()
            .filter(|(g, _)| !self.design.penalized[*g] || !self.is_zero(*g))
            .flat_map(|(g, cols)| cols.iter().enumerate().map(move |(a, &k)| (g, a, k)))
            .filter(|&(_, _, k)| self.d[k] > 0.0)
            .collect();
        let m = slots.len();
        if m == 0 || m > NEWTON_MAX_COLS {
            return;
        }
        let width = self.x.len();
        if self.gram.is_empty() {
            self.gram = vec![f64::NAN; width * width];
        }
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let (a, b) = (slots[i].2, slots[j].2);
                let mut v = self.gram[a * width + b];
                if v.is_nan() {
                    v = 2.0 * dot(&self.x[a], &self.x[b]);
                    self.gram[a * width + b] = v;
                    self.gram[b * width + a] = v;
                }
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        let mut obj = self.current_objective(lambda);
        for _ in 0..NEWTON_STEPS {
            let mut grad: Vec<f64> = slots.iter().map(|&(_, _, k)| -2.0 * dot(&self.x[k], &self.resid)).collect();
            let mut hess = gram.clone();
            // curvature of lambda * ||gamma_g||, block by block
            let mut i = 0;
            while i < m {
                let g = slots[i].0;
                let end = (i..m).find(|&j| slots[j].0 != g).unwrap_or(m);
                if self.design.penalized[g] {
                    let nrm = slots[i..end]
                        .iter()
                        .map(|&(g, a, _)| self.gamma[g][a].powi(2))
                        .sum::<f64>()
                        .sqrt();
                    for r in i..end {
                        let ur = self.gamma[g][slots[r].1] / nrm;
                        grad[r] += lambda * ur;
                        for c in i..end {
                            let uc = self.gamma[g][slots[c].1] / nrm;
                            let eye = if r == c { 1.0 } else { 0.0 };
                            hess[r * m + c] += lambda / nrm * (eye - ur * uc);
                        }
                    }
                }
                i = end;
            }
            let neg: Vec<f64> = grad.iter().map(|v| -v).collect();
            let old: Vec<f64> = slots.iter().map(|&(g, a, _)| self.gamma[g][a]).collect();
            let old_resid = self.resid.clone();
            let mut damping = if self.damping > NEWTON_MIN_DAMPING { self.damping * 0.01 } else { 0.0 };
            let moved = loop {
                let mut damped = hess.clone();
                for i in 0..m {
                    damped[i * m + i] += damping * hess[i * m + i];
                }
                let step = solve_psd(&damped, m, &neg);
                let decrement = -dot(&grad, &step);
                if !(decrement > 0.0) {
                    return;
                }
                let mut t = 1.0;
                while t >= NEWTON_MIN_STEP {
                    self.resid.copy_from_slice(&old_resid);
                    for (&(g, a, k), (o, d)) in slots.iter().zip(old.iter().zip(&step)) {
                        let v = o + t * d;
                        self.gamma[g][a] = v;
                        for (r, xv) in self.resid.iter_mut().zip(&self.x[k]) {
                            *r -= (v - o) * xv;
                        }
                    }
                    let trial = self.current_objective(lambda);
                    if trial <= obj - 1e-4 * t * decrement {
                        obj = trial;
                        break;
                    }
                    t *= 0.5;
                }
                if t >= NEWTON_MIN_STEP {
                    self.damping = damping;
                    break step.iter().map(|d| (t * d).abs()).fold(0.0, f64::max);
                }
                for (&(g, a, _), o) in slots.iter().zip(&old) {
                    self.gamma[g][a] = *o;
                }
                self.resid.copy_from_slice(&old_resid);
                // the quadratic model is unreliable along flat directions; shorten the step
                damping = if damping == 0.0 { NEWTON_MIN_DAMPING } else { damping * 100.0 };
                if damping > 1e6 {
                    return;
                }
            };
            if moved < 1e-2 * tol {
                return;
            }
        }
    }

    fn kkt(&self, lambda: f64, lambda_max: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (g, cols) in self.design.groups.iter().enumerate() {
            let grad: Vec<f64> = cols.iter().map(|&k| 2.0 * dot(&self.x[k], &self.resid)).collect();
            let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            let v = if !self.design.penalized[g] {
                gn
            } else if self.is_zero(g) {
                (gn - lambda).max(0.0)
            } else {
                let bn = self.gamma[g].iter().map(|v| v * v).sum::<f64>().sqrt();
                grad.iter()
                    .zip(&self.gamma[g])
                    .map(|(gr, b)| (gr - lambda * b / bn).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            worst = worst.max(v);
        }
        let scale = lambda.max(lambda_max);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    fn solution(&self, lambda: f64, kkt: f64, iterations: usize) -> GroupLassoSolution {
        let beta: Vec<Vec<f64>> = self
            .design
            .groups
            .iter()
            .enumerate()
            .map(|(g, cols)| {
                cols.iter()
                    .enumerate()
                    .map(|(a, &k)| self.gamma[g][a] / self.design.scale[k])
                    .collect()
            })
            .collect();
        let loss: f64 = self.resid.iter().map(|r| r * r).sum();
        let penalty: f64 = (0..self.gamma.len())
            .filter(|&g| self.design.penalized[g])
            .map(|g| self.gamma[g].iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        GroupLassoSolution {
            beta,
            lambda,
            objective: loss + lambda * penalty,
            kkt_residual: kkt,
            iterations,
        }
    }
}

/// Minimizer of `sum_k (d_k b_k^2 - 2 s_k b_k) + lambda ||b||` for diagonal `d`.
fn block_solution(s: &[f64], d: &[f64], lambda: f64) -> Vec<f64> {
    let live: Vec<usize> = (0..s.len()).filter(|&k| d[k] > 0.0).collect();
    let mut out = vec![0.0; s.len()];
    if live.is_empty() {
        return out;
    }
    if lambda == 0.0 {
        for &k in &live {
            out[k] = s[k] / d[k];
        }
        return out;
    }
    let half = 0.5 * lambda;
    let s_norm = live.iter().map(|&k| s[k] * s[k]).sum::<f64>().sqrt();
    if s_norm <= half {
        return out;
    }
    // root of f(rho) = sum s_k^2 / (d_k rho + lambda/2)^2 - 1, decreasing in rho
    let f = |rho: f64| -> (f64, f64) {
        let mut v = -1.0;
        let mut dv = 0.0;
        for &k in &live {
            let den = d[k] * rho + half;
            let q = s[k] * s[k] / (den * den);
            v += q;
            dv -= 2.0 * q * d[k] / den;
        }
        (v, dv)
    };
    let d_min = live.iter().map(|&k| d[k]).fold(f64::INFINITY, f64::min);
    let d_max = live.iter().map(|&k| d[k]).fold(0.0, f64::max);
    let mut lo = ((s_norm - half) / d_max).max(0.0);
    let mut hi = (s_norm - half) / d_min;
    let mut rho = 0.5 * (lo + hi);
    if hi - lo > 1e-12 * hi {
        for _ in 0..200 {
            let (v, dv) = f(rho);
            if v > 0.0 {
                lo = rho;
            } else {
                hi = rho;
            }
            let newton = rho - v / dv;
            let next = if dv < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - rho).abs() <= 1e-12 * next.abs().max(f64::MIN_POSITIVE) {
                rho = next;
                break;
            }
            rho = next;
        }
    }
    for &k in &live {
        out[k] = s[k] * rho / (d[k] * rho + half);
    }
    out
}

/// Solves the group-LASSO problem at a single `lambda` from a cold start.
pub fn solve(
    design: &GroupedDesign,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GroupLassoSolution> {
    check_solve_args(lambda, tol)?;
    let mut solver = Solver::new(design, y)?;
    solver.run(lambda, tol, max_iter)
}

/// As [`solve`] but starting from `start` (original-scale coefficients).
pub fn solve_from(
    design: &GroupedDesign,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
    start: &[Vec<f64>],
) -> Result<GroupLassoSolution> {
    check_solve_args(lambda, tol)?;
    let mut solver = Solver::new(design, y)?;
    solver.warm_start(start);
    solver.run(lambda, tol, max_iter)
}

fn check_solve_args(lambda: f64, tol: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {tol}")));
    }
    Ok(())
}

/// Smallest `lambda` that zeroes every penalized group (after fitting the
/// unpenalized groups): `2 * max_g ||X_g' r||_2` on the standardized columns.
pub fn lambda_max(design: &GroupedDesign, y: &[f64]) -> Result<f64> {
    Ok(Solver::new(design, y)?.lambda_max())
}
