//! Causal MARS: a forward pass whose candidates are scored by how much better
//! arm-specific coefficients fit than a shared coefficient.
//!
//! With the current model fit separately per arm, adding a hinge pair either
//! with its own coefficients in each arm (`separate`) or with one coefficient
//! for both arms (`shared`) gives
//!
//! ```text
//! dRSS = RSS(shared) - RSS(separate) = red_treated + red_control - red_shared
//! ```
//!
//! The pass accepts the candidate with the largest `dRSS`, summed over row
//! groups (propensity strata for the stratified variant).

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{check_functions, BasisFunction, HingeTerm, Sign};
use crate::dataset::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimator::HteModel;
use crate::forward::{admissible_pairs, check_finite, columns_of, knots_for, ForwardConfig, EXACT_FIT_TOL, STOP_REL_TOL};
use crate::linalg::least_squares;
use crate::scan::{better, children, Block, Choice, TIE_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalMarsFit {
    pub n_features: usize,
    pub basis: Vec<BasisFunction>,
    pub coef_treat: Vec<f64>,
    pub coef_control: Vec<f64>,
    /// Arm-specific RSS, initial value first.
    pub rss_trace: Vec<f64>,
}

/// Blocks of one row group: the two arms and the pooled rows.
struct GroupBlocks {
    treated: Block,
    control: Block,
    shared: Block,
}

pub(crate) struct CausalPass {
    pub basis: Vec<BasisFunction>,
    pub design: Vec<Vec<f64>>,
    pub rss_trace: Vec<f64>,
}

fn split_column(col: &[f64], t: &[u8]) -> (Vec<f64>, Vec<f64>) {
    let treated = col.iter().zip(t).map(|(v, &a)| if a == 1 { *v } else { 0.0 }).collect();
    let control = col.iter().zip(t).map(|(v, &a)| if a == 0 { *v } else { 0.0 }).collect();
    (treated, control)
}

impl GroupBlocks {
    fn new(rows: &[usize], t: &[u8], y: &[f64]) -> Self {
        let treated_rows = rows.iter().copied().filter(|&i| t[i] == 1).collect();
        let control_rows = rows.iter().copied().filter(|&i| t[i] == 0).collect();
        Self {
            treated: Block::new(treated_rows, y),
            control: Block::new(control_rows, y),
            shared: Block::new(rows.to_vec(), y),
        }
    }

    fn push(&mut self, col: &[f64], t: &[u8]) {
        self.treated.push_global(col);
        self.control.push_global(col);
        let (a, b) = split_column(col, t);
        self.shared.push_global(&a);
        self.shared.push_global(&b);
    }

    fn rss(&self) -> f64 {
        self.treated.rss() + self.control.rss()
    }

    fn gains(&self, parent: &[f64], x: &[f64], knots: &[f64]) -> Vec<f64> {
        let rt = self.treated.knot_reductions(parent, x, knots);
        let rc = self.control.knot_reductions(parent, x, knots);
        let rs = self.shared.knot_reductions(parent, x, knots);
        rt.iter()
            .zip(&rc)
            .zip(&rs)
            .map(|((a, b), c)| (a + b - c).max(0.0))
            .collect()
    }
}

/// Greedy causal forward pass with the criterion summed over `groups`
/// (a partition of the rows).
pub(crate) fn causal_pass(
    x: &Array2<f64>,
    t: &[u8],
    y: &[f64],
    groups: &[Vec<usize>],
    config: &ForwardConfig,
    seed: u64,
) -> Result<CausalPass> {
    config.validate()?;
    check_finite(y)?;
    let n = x.nrows();
    let columns_x = columns_of(x);
    let rows: Vec<usize> = (0..n).collect();
    let one = vec![1.0; n];
    let mut blocks: Vec<GroupBlocks> = groups.iter().map(|g| GroupBlocks::new(g, t, y)).collect();
    for b in &mut blocks {
        b.push(&one, t);
    }
    let mut basis = vec![BasisFunction::constant()];
    let mut design = vec![one];
    let total_rss = |blocks: &[GroupBlocks]| blocks.iter().map(GroupBlocks::rss).sum::<f64>();
    let mut rss_trace = vec![total_rss(&blocks)];
    let floor = EXACT_FIT_TOL * y.iter().map(|v| v * v).sum::<f64>();
    let mut added = 0;
    let mut step = 0u64;
    while added < config.m_max {
        let rss_now = total_rss(&blocks);
        if rss_now <= floor {
            break;
        }
        let pairs = admissible_pairs(&basis, &design, &rows, columns_x.len(), config);
        let per_pair: Vec<Vec<Choice>> = pairs
            .par_iter()
            .map(|&(m, j)| {
                let parent = &design[m];
                let xj = &columns_x[j];
                let knots = knots_for(&rows, parent, xj, config.knot_subsample, seed, [step, m as u64, j as u64]);
                let mut gain = vec![0.0; knots.len()];
                for b in &blocks {
                    for (g, v) in gain.iter_mut().zip(b.gains(parent, xj, &knots)) {
                        *g += v;
                    }
                }
                knots
                    .into_iter()
                    .zip(gain)
                    .map(|(knot, g)| Choice {
                        parent: m,
                        variable: j,
                        knot,
                        score: -g,
                    })
                    .collect()
            })
            .collect();
        let tie = TIE_TOL * rss_now;
        let mut best: Option<Choice> = None;
        for c in per_pair.iter().flatten() {
            if better(&best, c, tie) {
                best = Some(*c);
            }
        }
        let Some(best) = best else { break };
        if -best.score <= STOP_REL_TOL * rss_now {
            break;
        }
        let (plus, minus) = children(&design[best.parent], &columns_x[best.variable], best.knot);
        for b in &mut blocks {
            b.push(&plus, t);
            b.push(&minus, t);
        }
        let pb = &basis[best.parent];
        let bp = pb.with_term(HingeTerm::new(best.variable, Sign::Positive, best.knot))?;
        let bm = pb.with_term(HingeTerm::new(best.variable, Sign::Negative, best.knot))?;
        basis.push(bp);
        basis.push(bm);
        design.push(plus);
        design.push(minus);
        rss_trace.push(total_rss(&blocks).min(rss_now));
        added += 2;
        step += 1;
    }
    Ok(CausalPass {
        basis,
        design,
        rss_trace,
    })
}

/// Least-squares coefficients of `y` on `design` restricted to `rows`.
pub(crate) fn fit_rows(design: &[Vec<f64>], y: &[f64], rows: &[usize]) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = design
        .iter()
        .map(|c| rows.iter().map(|&i| c[i]).collect())
        .collect();
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    least_squares(&refs, &ys)
}

pub fn fit_causal_mars(data: &Dataset, config: &ForwardConfig) -> Result<CausalMarsFit> {
    data.require_both_arms()?;
    let t: Vec<u8> = data.treatment().to_vec();
    let y: Vec<f64> = data.outcome().to_vec();
    let all: Vec<usize> = (0..data.n()).collect();
    let pass = causal_pass(data.covariates(), &t, &y, &[all], config, 0)?;
    let treated: Vec<usize> = (0..data.n()).filter(|&i| t[i] == 1).collect();
    let control: Vec<usize> = (0..data.n()).filter(|&i| t[i] == 0).collect();
    Ok(CausalMarsFit {
        n_features: data.p(),
        coef_treat: fit_rows(&pass.design, &y, &treated),
        coef_control: fit_rows(&pass.design, &y, &control),
        basis: pass.basis,
        rss_trace: pass.rss_trace,
    })
}

pub(crate) fn linear(basis: &[BasisFunction], coef: &[f64], x: &[f64]) -> f64 {
    basis.iter().zip(coef).map(|(b, c)| c * b.eval_slice(x)).sum()
}

impl HteModel for CausalMarsFit {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_width(x.len())?;
        let xs = x.to_vec();
        Ok(self
            .basis
            .iter()
            .zip(self.coef_treat.iter().zip(&self.coef_control))
            .map(|(b, (a, c))| (a - c) * b.eval_slice(&xs))
            .sum())
    }

    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> Result<f64> {
        self.check_width(x.len())?;
        let coef = match arm {
            Arm::Treated => &self.coef_treat,
            Arm::Control => &self.coef_control,
        };
        Ok(linear(&self.basis, coef, &x.to_vec()))
    }
}

impl CausalMarsFit {
    pub fn validate(&self) -> Result<()> {
        check_functions(&self.basis, self.n_features)?;
        if self.coef_treat.len() != self.basis.len() || self.coef_control.len() != self.basis.len() {
            return Err(Error::ArchiveSchema("coefficient count differs from basis size".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn grid(n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, 2), |(i, j)| ((i * (3 + 4 * j) + j) % 37) as f64 / 37.0 - 0.5)
    }

    #[test]
    fn no_heterogeneity_no_terms() {
        // every covariate row appears once in each arm with the same outcome
        let base = grid(30);
        let x = ndarray::concatenate![ndarray::Axis(0), base, base];
        let t: Array1<u8> = (0..60).map(|i| u8::from(i < 30)).collect();
        let y = x.column(0).mapv(|v| (v - 0.1).max(0.0) * 3.0 + 1.0);
        let d = Dataset::new(x, t, y).unwrap();
        let fit = fit_causal_mars(&d, &ForwardConfig::default()).unwrap();
        assert_eq!(fit.basis.len(), 1);
    }

    #[test]
    fn opposite_slopes_found() {
        let x = grid(80);
        let t: Array1<u8> = (0..80).map(|i| (i % 2) as u8).collect();
        let y: Array1<f64> = (0..80)
            .map(|i| if t[i] == 1 { x[[i, 0]] } else { -x[[i, 0]] })
            .collect();
        let d = Dataset::new(x, t, y).unwrap();
        let fit = fit_causal_mars(&d, &ForwardConfig::default()).unwrap();
        assert_eq!(fit.basis[1].terms()[0].variable, 0);
        assert!(fit.coef_treat[1] * fit.coef_control[1] < 0.0);
        let row = d.row(3);
        let diff = fit.predict_outcome(row, Arm::Treated).unwrap()
            - fit.predict_outcome(row, Arm::Control).unwrap();
        assert!((diff - fit.predict_hte(row).unwrap()).abs() < 1e-12);
    }
}
