//! MARS forward pass used as a basis generator.
//!
//! Starting from the constant function, each step multiplies an existing basis
//! function (the parent) by a mirrored hinge pair on a variable the parent does
//! not use yet, choosing the `(parent, variable, knot)` triple whose least-squares
//! fit has the smallest residual sum of squares. Both children are always added.
//! Knots are observed values of the variable on rows where the parent is positive.
//! There is no backward pruning.

use ndarray::{Array2, ArrayView1};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFunction, HingeTerm, Sign};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, rss};
use crate::rng::{derive_path, rng_from};
use crate::scan::{active_count, better, candidate_knots, children, Block, Choice, TIE_TOL};

/// Relative RSS improvement below which the pass stops.
pub const STOP_REL_TOL: f64 = 1e-12;
/// Residual sum of squares, relative to `|y|^2`, treated as an exact fit.
pub const EXACT_FIT_TOL: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForwardConfig {
    /// Maximum number of non-intercept terms (even: terms come in pairs).
    pub m_max: usize,
    /// Maximum interaction degree of a basis function.
    pub k_max: usize,
    /// Minimum number of rows where a parent is strictly positive.
    pub min_active: usize,
    /// Optional cap on candidate knots per (parent, variable).
    pub knot_subsample: Option<usize>,
    /// Score every candidate with a full refit instead of the sorted sweep.
    pub naive_lof: bool,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            m_max: 10,
            k_max: 2,
            min_active: 5,
            knot_subsample: None,
            naive_lof: false,
        }
    }
}

impl ForwardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_max < 2 || self.m_max % 2 != 0 {
            return Err(Error::config(
                "m_max",
                format!("must be an even integer >= 2, got {}", self.m_max),
            ));
        }
        if self.k_max < 1 {
            return Err(Error::config("k_max", "must be >= 1"));
        }
        if self.min_active < 1 {
            return Err(Error::config("min_active", "must be >= 1"));
        }
        if self.knot_subsample == Some(0) {
            return Err(Error::config("knot_subsample", "must be >= 1 when set"));
        }
        Ok(())
    }
}

/// One accepted hinge pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptedSplit {
    pub parent: usize,
    pub variable: usize,
    pub knot: f64,
    pub lof: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardFit {
    /// Constant first, then children in acceptance order.
    pub basis: Vec<BasisFunction>,
    pub coefficients: Vec<f64>,
    /// RSS of the constant-only model followed by the RSS after each accepted pair.
    pub rss_trace: Vec<f64>,
    pub splits: Vec<AcceptedSplit>,
}

/// LOF of every admissible candidate at the current basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub parent: usize,
    pub variable: usize,
    pub knot: f64,
    pub lof: f64,
}

pub(crate) fn columns_of(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.columns().into_iter().map(|c| c.to_vec()).collect()
}

pub(crate) fn check_finite(response: &[f64]) -> Result<()> {
    if let Some(i) = response.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "response is {} at row {i}",
            response[i]
        )));
    }
    Ok(())
}

/// Admissible `(parent, variable)` pairs in lexicographic order.
pub(crate) fn admissible_pairs(
    basis: &[BasisFunction],
    columns: &[Vec<f64>],
    rows: &[usize],
    p: usize,
    config: &ForwardConfig,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (m, b) in basis.iter().enumerate() {
        if b.degree() >= config.k_max || active_count(rows, &columns[m]) < config.min_active {
            continue;
        }
        for j in 0..p {
            if !b.uses_variable(j) {
                pairs.push((m, j));
            }
        }
    }
    pairs
}

/// Candidate knots for a pair, subsampled uniformly when capped.
pub(crate) fn knots_for(
    rows: &[usize],
    parent: &[f64],
    x: &[f64],
    cap: Option<usize>,
    seed: u64,
    path: [u64; 3],
) -> Vec<f64> {
    let mut knots = candidate_knots(rows, parent, x);
    if let Some(cap) = cap {
        if knots.len() > cap {
            let mut rng = rng_from(derive_path(seed, &path));
            let mut keep: Vec<usize> = sample(&mut rng, knots.len(), cap).into_vec();
            keep.sort_unstable();
            knots = keep.into_iter().map(|i| knots[i]).collect();
        }
    }
    knots
}

/// Residual sum of squares of the least-squares fit of `response` on the
/// current design plus the two children `parent·[x-c]+` and `parent·[c-x]+`.
pub fn candidate_lof(
    current_design: &[Vec<f64>],
    parent_column: &[f64],
    xj: &[f64],
    c: f64,
    response: &[f64],
) -> f64 {
    let (plus, minus) = children(parent_column, xj, c);
    let mut cols: Vec<&[f64]> = current_design.iter().map(Vec::as_slice).collect();
    cols.push(&plus);
    cols.push(&minus);
    let coef = least_squares(&cols, response);
    rss(&cols, &coef, response)
}

struct ForwardState<'a> {
    columns_x: Vec<Vec<f64>>,
    response: &'a [f64],
    rows: Vec<usize>,
    basis: Vec<BasisFunction>,
    design: Vec<Vec<f64>>,
    block: Block,
}

impl<'a> ForwardState<'a> {
    fn new(x: &Array2<f64>, response: &'a [f64]) -> Self {
        let n = x.nrows();
        let rows: Vec<usize> = (0..n).collect();
        let mut block = Block::new(rows.clone(), response);
        let one = vec![1.0; n];
        block.push_global(&one);
        Self {
            columns_x: columns_of(x),
            response,
            rows,
            basis: vec![BasisFunction::constant()],
            design: vec![one],
            block,
        }
    }

    fn with_basis(x: &Array2<f64>, response: &'a [f64], basis: &[BasisFunction]) -> Result<Self> {
        let mut s = Self::new(x, response);
        for b in basis.iter().filter(|b| !b.is_constant()) {
            crate::basis::check_dimension(b, x.ncols())?;
            let col = crate::basis::evaluate_rows(b, x).to_vec();
            s.block.push_global(&col);
            s.design.push(col);
            s.basis.push(b.clone());
        }
        Ok(s)
    }

    fn scores(&self, config: &ForwardConfig, seed: u64, step: usize) -> Vec<CandidateScore> {
        let pairs = admissible_pairs(
            &self.basis,
            &self.design,
            &self.rows,
            self.columns_x.len(),
            config,
        );
        let rss_now = self.block.rss();
        let per_pair: Vec<Vec<CandidateScore>> = pairs
            .par_iter()
            .map(|&(m, j)| {
                let parent = &self.design[m];
                let x = &self.columns_x[j];
                let knots = knots_for(
                    &self.rows,
                    parent,
                    x,
                    config.knot_subsample,
                    seed,
                    [step as u64, m as u64, j as u64],
                );
                let lofs: Vec<f64> = if config.naive_lof {
                    knots
                        .iter()
                        .map(|&c| candidate_lof(&self.design, parent, x, c, self.response))
                        .collect()
                } else {
                    self.block
                        .knot_reductions(parent, x, &knots)
                        .into_iter()
                        .map(|r| (rss_now - r).max(0.0))
                        .collect()
                };
                knots
                    .into_iter()
                    .zip(lofs)
                    .map(|(knot, lof)| CandidateScore {
                        parent: m,
                        variable: j,
                        knot,
                        lof,
                    })
                    .collect()
            })
            .collect();
        per_pair.into_iter().flatten().collect()
    }

    fn accept(&mut self, parent: usize, variable: usize, knot: f64) -> Result<()> {
        let (plus, minus) = children(&self.design[parent], &self.columns_x[variable], knot);
        let pb = &self.basis[parent];
        let bp = pb.with_term(HingeTerm::new(variable, Sign::Positive, knot))?;
        let bm = pb.with_term(HingeTerm::new(variable, Sign::Negative, knot))?;
        self.block.push_global(&plus);
        self.block.push_global(&minus);
        self.design.push(plus);
        self.design.push(minus);
        self.basis.push(bp);
        self.basis.push(bm);
        Ok(())
    }
}

/// Picks the winner among scored candidates with the lexicographic tie rule.
pub(crate) fn select(scores: &[CandidateScore], rss_now: f64) -> Option<CandidateScore> {
    let tie = TIE_TOL * rss_now.max(f64::MIN_POSITIVE);
    let mut best: Option<Choice> = None;
    for s in scores {
        let cand = Choice {
            parent: s.parent,
            variable: s.variable,
            knot: s.knot,
            score: s.lof,
        };
        if better(&best, &cand, tie) {
            best = Some(cand);
        }
    }
    best.map(|b| CandidateScore {
        parent: b.parent,
        variable: b.variable,
        knot: b.knot,
        lof: b.score,
    })
}

/// Greedy forward pass of MARS on `(x, response)`.
///
/// `seed` only drives knot subsampling; without a cap the pass is fully
/// deterministic in its inputs.
pub fn forward_pass(
    x: &Array2<f64>,
    response: ArrayView1<'_, f64>,
    config: &ForwardConfig,
    seed: u64,
) -> Result<ForwardFit> {
    config.validate()?;
    if response.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: response.len(),
        });
    }
    let response = response.to_vec();
    check_finite(&response)?;
    let mut state = ForwardState::new(x, &response);
    let mut rss_trace = vec![state.block.rss()];
    let mut splits = Vec::new();
    let mut added = 0;
    let floor = EXACT_FIT_TOL * response.iter().map(|v| v * v).sum::<f64>();
    while added < config.m_max {
        let rss_now = state.block.rss();
        if rss_now <= floor {
            break;
        }
        let scores = state.scores(config, seed, splits.len());
        let Some(best) = select(&scores, rss_now) else {
            break;
        };
        if rss_now - best.lof <= STOP_REL_TOL * rss_now {
            break;
        }
        state.accept(best.parent, best.variable, best.knot)?;
        splits.push(AcceptedSplit {
            parent: best.parent,
            variable: best.variable,
            knot: best.knot,
            lof: best.lof,
        });
        // the trace is the actual post-acceptance RSS, never above the previous one
        rss_trace.push(state.block.rss().min(rss_now));
        added += 2;
    }
    let cols: Vec<&[f64]> = state.design.iter().map(Vec::as_slice).collect();
    let coefficients = least_squares(&cols, &response);
    Ok(ForwardFit {
        basis: state.basis,
        coefficients,
        rss_trace,
        splits,
    })
}

/// Scores every admissible candidate against an explicit current basis using the
/// configured evaluation path (sweep or naive refit).
pub fn scan_candidates(
    x: &Array2<f64>,
    response: ArrayView1<'_, f64>,
    basis: &[BasisFunction],
    config: &ForwardConfig,
) -> Result<Vec<CandidateScore>> {
    config.validate()?;
    let response = response.to_vec();
    check_finite(&response)?;
    let state = ForwardState::with_basis(x, &response, basis)?;
    Ok(state.scores(config, 0, 0))
}

impl ForwardFit {
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (b, c) in self.basis.iter().zip(&self.coefficients) {
            total += c * b.eval(x)?;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{Array1, Array2};

    fn grid(n: usize, p: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, p), |(i, j)| {
            let v = ((i * (2 * j + 3) + 7 * j) % 101) as f64 / 101.0;
            v * 2.0 - 0.5
        })
    }

    #[test]
    fn constant_response_accepts_nothing() {
        let x = grid(40, 3);
        let y = Array1::from_elem(40, 2.5);
        let fit = forward_pass(&x, y.view(), &ForwardConfig::default(), 0).unwrap();
        assert_eq!(fit.basis.len(), 1);
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn recovers_single_hinge() {
        let x = grid(200, 5);
        let c = x[[17, 1]];
        let y: Array1<f64> = x.column(1).mapv(|v| 3.0 * (v - c).max(0.0));
        let fit = forward_pass(&x, y.view(), &ForwardConfig::default(), 0).unwrap();
        assert_eq!(fit.splits[0].variable, 1);
        assert_eq!(fit.splits[0].knot, c);
        assert!(fit.rss_trace[1] < 1e-8 * fit.rss_trace[0]);
    }

    #[test]
    fn rejects_bad_config_and_response() {
        let x = grid(10, 2);
        let y = Array1::zeros(10);
        let odd = ForwardConfig {
            m_max: 3,
            ..Default::default()
        };
        assert!(forward_pass(&x, y.view(), &odd, 0).is_err());
        let mut bad = y.clone();
        bad[3] = f64::NAN;
        assert!(forward_pass(&x, bad.view(), &ForwardConfig::default(), 0).is_err());
    }

    #[test]
    fn knot_cap_limits_candidates() {
        let x = grid(60, 2);
        let y: Array1<f64> = x.column(0).mapv(|v| v.sin());
        let cfg = ForwardConfig {
            knot_subsample: Some(4),
            ..Default::default()
        };
        let scores = scan_candidates(&x, y.view(), &[BasisFunction::constant()], &cfg).unwrap();
        assert_eq!(scores.len(), 8);
    }

    #[test]
    fn naive_and_sweep_agree_on_small_problem() {
        let x = grid(25, 3);
        let y: Array1<f64> = (0..25).map(|i| ((i * i) % 7) as f64 - x[[i, 2]]).collect();
        let fast = forward_pass(&x, y.view(), &ForwardConfig::default(), 0).unwrap();
        let slow = forward_pass(
            &x,
            y.view(),
            &ForwardConfig {
                naive_lof: true,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        assert_eq!(fast.basis, slow.basis);
    }
}
