//! Sorted-sweep evaluation of hinge-pair candidates.
//!
//! Adding the mirrored pair `h·[x-c]+`, `h·[c-x]+` to a design that already
//! contains the parent `h` spans the same space as adding `u = h·x` and
//! `a_c = h·[x-c]+`, because `a_c - b_c = u - c·h`. The reduction from `u` does
//! not depend on the knot, and the reduction from `a_c` only needs sums over the
//! rows with `x > c`, which accumulate in one descending sweep.

use crate::linalg::{dot, norm_sq, OrthoBasis, DEPENDENCE_TOL};

/// Smallest energy, relative to the whole `h·(x - c)`, of a hinge that counts
/// as a new direction.
const ROUNDING_TOL: f64 = 1e-24;

/// Below this fraction of the whole `h·(x - c)` energy the running sums
/// cancel too much and the hinge is evaluated row by row.
const CANCEL_TOL: f64 = 1e-4;

/// Squared norm, squared projection onto `qs` and inner product with the
/// residual of the hinge `h·[x - c]+`, from the rows above the knot.
fn direct_hinge(above: &[(f64, usize)], h: &[f64], resid: &[f64], qs: &[&[f64]], c: f64) -> (f64, f64, f64) {
    let (mut aa, mut ar) = (0.0, 0.0);
    let mut qa = vec![0.0; qs.len()];
    for &(xv, l) in above {
        let a = h[l] * (xv - c);
        aa += a * a;
        ar += a * resid[l];
        for (acc, q) in qa.iter_mut().zip(qs) {
            *acc += q[l] * a;
        }
    }
    (aa, qa.iter().map(|v| v * v).sum(), ar)
}

/// Rows of one least-squares subproblem with the orthonormalized current design
/// and the current residual, all indexed locally.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub rows: Vec<usize>,
    pub ortho: OrthoBasis,
}

impl Block {
    pub fn new(rows: Vec<usize>, response: &[f64]) -> Self {
        let local: Vec<f64> = rows.iter().map(|&i| response[i]).collect();
        Self {
            rows,
            ortho: OrthoBasis::new(&local),
        }
    }

    /// Adds a globally indexed column restricted to this block's rows.
    pub fn push_global(&mut self, column: &[f64]) -> bool {
        let local: Vec<f64> = self.rows.iter().map(|&i| column[i]).collect();
        self.ortho.push(&local)
    }

    pub fn rss(&self) -> f64 {
        self.ortho.rss()
    }

    /// RSS reduction for each knot in `knots` (ascending) from adding the hinge
    /// pair on `parent` (global column) and covariate `x` (global column).
    pub fn knot_reductions(&self, parent: &[f64], x: &[f64], knots: &[f64]) -> Vec<f64> {
        let mut active: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(_, &g)| parent[g] > 0.0)
            .map(|(l, &g)| (x[g], l))
            .collect();
        let mut out = vec![0.0; knots.len()];
        if active.is_empty() {
            return out;
        }
        active.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let shift = active[active.len() / 2].0;

        let m = self.rows.len();
        let mut u = vec![0.0; m];
        let mut h = vec![0.0; m];
        for &(xv, l) in &active {
            let hv = parent[self.rows[l]];
            h[l] = hv;
            u[l] = hv * (xv - shift);
        }

        // extend the basis with u when it adds a new direction
        let uu = norm_sq(&u);
        let mut extra: Option<Vec<f64>> = None;
        let mut red_u = 0.0;
        let mut resid = self.ortho.resid.clone();
        if uu > 0.0 {
            let mut w = self.ortho.remainder(&u);
            let rem = norm_sq(&w);
            if rem > DEPENDENCE_TOL * uu {
                let inv = 1.0 / rem.sqrt();
                w.iter_mut().for_each(|v| *v *= inv);
                let c = dot(&w, &resid);
                red_u = c * c;
                for (r, wi) in resid.iter_mut().zip(&w) {
                    *r -= c * wi;
                }
                extra = Some(w);
            }
        }
        let resid_ss = norm_sq(&resid);
        let qs: Vec<&[f64]> = self
            .ortho
            .q
            .iter()
            .map(Vec::as_slice)
            .chain(extra.as_deref())
            .collect();
        let k = qs.len();
        let (t_hhxx, t_hhx, t_hh) = active.iter().fold((0.0, 0.0, 0.0), |acc, &(xv, l)| {
            let xs = xv - shift;
            let hh = h[l] * h[l];
            (acc.0 + hh * xs * xs, acc.1 + hh * xs, acc.2 + hh)
        });

        // sums over rows with x > c
        let (mut s_hhxx, mut s_hhx, mut s_hh, mut s_hrx, mut s_hr) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut s_qhx = vec![0.0; k];
        let mut s_qh = vec![0.0; k];
        let mut next = active.len();
        for (ki, &c) in knots.iter().enumerate().rev() {
            let cs = c - shift;
            while next > 0 && active[next - 1].0 > c {
                next -= 1;
                let (xv, l) = active[next];
                let xs = xv - shift;
                let hv = h[l];
                let hr = hv * resid[l];
                s_hhxx += hv * hv * xs * xs;
                s_hhx += hv * hv * xs;
                s_hh += hv * hv;
                s_hrx += hr * xs;
                s_hr += hr;
                for (kk, q) in qs.iter().enumerate() {
                    let qh = q[l] * hv;
                    s_qhx[kk] += qh * xs;
                    s_qh[kk] += qh;
                }
            }
            let reference = t_hhxx - 2.0 * cs * t_hhx + cs * cs * t_hh;
            let mut aa = s_hhxx - 2.0 * cs * s_hhx + cs * cs * s_hh;
            let mut proj: f64 = (0..k)
                .map(|kk| {
                    let v = s_qhx[kk] - cs * s_qh[kk];
                    v * v
                })
                .sum();
            let mut ar = s_hrx - cs * s_hr;
            if aa < CANCEL_TOL * reference {
                (aa, proj, ar) = direct_hinge(&active[next..], &h, &resid, &qs, c);
            }
            let mut red_a = 0.0;
            let rem = aa - proj;
            // hinges living on rounding-level parent values are not new directions
            if aa > 0.0 && rem > DEPENDENCE_TOL * aa && rem > ROUNDING_TOL * reference {
                red_a = (ar * ar / rem).min(resid_ss);
            }
            out[ki] = red_u + red_a;
        }
        out
    }
}

/// Distinct values of `x` on rows (of `rows`) where `parent > 0`, ascending.
pub(crate) fn candidate_knots(rows: &[usize], parent: &[f64], x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|&&i| parent[i] > 0.0)
        .map(|&i| x[i])
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Number of rows where `parent > 0`.
pub(crate) fn active_count(rows: &[usize], parent: &[f64]) -> usize {
    rows.iter().filter(|&&i| parent[i] > 0.0).count()
}

/// Hinge-pair children of `parent` at knot `c` on covariate `x`.
pub(crate) fn children(parent: &[f64], x: &[f64], c: f64) -> (Vec<f64>, Vec<f64>) {
    let plus = parent
        .iter()
        .zip(x)
        .map(|(h, xv)| h * (xv - c).max(0.0))
        .collect();
    let minus = parent
        .iter()
        .zip(x)
        .map(|(h, xv)| h * (c - xv).max(0.0))
        .collect();
    (plus, minus)
}

/// Candidate `(parent, variable, knot)` ordering used for deterministic tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Choice {
    pub parent: usize,
    pub variable: usize,
    pub knot: f64,
    pub score: f64,
}

/// Relative tolerance under which two candidate scores count as tied.
pub(crate) const TIE_TOL: f64 = 1e-9;

/// Folds candidates (visited in lexicographic order) keeping the lowest score;
/// a later candidate replaces the incumbent only when better by more than `tie`.
pub(crate) fn better(best: &Option<Choice>, cand: &Choice, tie: f64) -> bool {
    match best {
        None => true,
        Some(b) => cand.score < b.score - tie,
    }
}
