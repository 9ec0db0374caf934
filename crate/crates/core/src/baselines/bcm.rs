//! Bagged causal MARS with propensity-score stratification.
//!
//! Rows are binned into `q` equal-frequency propensity strata. Each bootstrap
//! replicate runs one causal forward pass whose criterion is summed over strata,
//! so the replicate's basis is shared by every stratum, and then fits arm
//! coefficients separately inside each stratum. A prediction uses the test
//! point's stratum and averages over replicates.

use ndarray::{Array1, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::causal::{causal_pass, fit_rows, linear};
use crate::basis::{check_functions, BasisFunction};
use crate::dataset::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimator::HteModel;
use crate::forward::ForwardConfig;
use crate::propensity::PropensityModel;
use crate::rng::{bootstrap_indices, derive_path, rng_from};

pub const DEFAULT_STRATA: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcmReplicate {
    pub basis: Vec<BasisFunction>,
    /// Coefficient group used by each stratum (strata merged in this replicate share one).
    pub group_of_stratum: Vec<usize>,
    pub coef_treat: Vec<Vec<f64>>,
    pub coef_control: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedBcmFit {
    pub n_features: usize,
    /// Upper propensity edge of each stratum; the last is 1.
    pub edges: Vec<f64>,
    pub propensity: Option<PropensityModel>,
    pub replicates: Vec<BcmReplicate>,
    /// Strata merged into a neighbour because a resample left them without an arm.
    pub merged_strata: usize,
}

/// Equal-frequency edges from training propensities.
pub fn strata_edges(e: &[f64], q: usize) -> Vec<f64> {
    let n = e.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e[a].total_cmp(&e[b]).then(a.cmp(&b)));
    let mut edges: Vec<f64> = (1..q)
        .map(|k| {
            let last = (k * n / q).max(1) - 1;
            e[order[last]]
        })
        .collect();
    edges.push(1.0);
    edges
}

/// First stratum whose edge is at or above `e`.
pub fn stratum_of(edges: &[f64], e: f64) -> usize {
    edges.iter().position(|&b| e <= b).unwrap_or(edges.len() - 1)
}

/// Groups of adjacent strata such that each group holds both arms.
/// Returns the group per stratum and the number of merges.
fn merge_strata(stratum: &[usize], t: &[u8], e: &[f64], q: usize) -> (Vec<usize>, usize) {
    // groups as contiguous stratum ranges with arm counts and propensity sums
    let mut groups: Vec<(usize, usize, [usize; 2], f64)> = (0..q).map(|s| (s, s, [0, 0], 0.0)).collect();
    for ((&s, &ti), &ei) in stratum.iter().zip(t).zip(e) {
        groups[s].2[ti as usize] += 1;
        groups[s].3 += ei;
    }
    let mut merges = 0;
    while groups.len() > 1 {
        let Some(g) = groups.iter().position(|g| g.2[0] == 0 || g.2[1] == 0) else {
            break;
        };
        let mean = |g: &(usize, usize, [usize; 2], f64)| {
            let c = g.2[0] + g.2[1];
            (c > 0).then(|| g.3 / c as f64)
        };
        let target = if g == 0 {
            1
        } else if g + 1 == groups.len() {
            g - 1
        } else {
            match (mean(&groups[g]), mean(&groups[g - 1]), mean(&groups[g + 1])) {
                (Some(m), Some(lo), Some(hi)) if (hi - m).abs() < (m - lo).abs() => g + 1,
                _ => g - 1,
            }
        };
        let (a, b) = (g.min(target), g.max(target));
        let right = groups.remove(b);
        let left = &mut groups[a];
        left.1 = right.1;
        left.2[0] += right.2[0];
        left.2[1] += right.2[1];
        left.3 += right.3;
        merges += 1;
    }
    let mut group_of = vec![0; q];
    for (gi, g) in groups.iter().enumerate() {
        for s in g.0..=g.1 {
            group_of[s] = gi;
        }
    }
    (group_of, merges)
}

/// Fits BCM with propensities from `propensity`.
pub fn fit_bcm(
    data: &Dataset,
    config: &ForwardConfig,
    b: usize,
    q: usize,
    propensity: &PropensityModel,
    seed: u64,
) -> Result<StratifiedBcmFit> {
    let e = propensity.predict_all(data.covariates());
    let resamples = bcm_resamples(data.n(), b, seed);
    fit_bcm_on_resamples(data, config, q, &e, Some(propensity.clone()), &resamples, seed)
}

/// Bootstrap row sets for BCM replicates.
pub fn bcm_resamples(n: usize, b: usize, seed: u64) -> Vec<Vec<usize>> {
    (0..b)
        .map(|r| bootstrap_indices(n, &mut rng_from(derive_path(seed, &[1, r as u64]))))
        .collect()
}

/// BCM on explicit resamples and per-row propensities.
pub fn fit_bcm_on_resamples(
    data: &Dataset,
    config: &ForwardConfig,
    q: usize,
    e: &Array1<f64>,
    propensity: Option<PropensityModel>,
    resamples: &[Vec<usize>],
    seed: u64,
) -> Result<StratifiedBcmFit> {
    config.validate()?;
    data.require_both_arms()?;
    if q < 1 {
        return Err(Error::config("q", "need at least one stratum"));
    }
    if resamples.is_empty() {
        return Err(Error::config("b", "need at least one bootstrap replicate"));
    }
    if e.len() != data.n() || e.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("propensities must be finite, one per row".into()));
    }
    let edges = strata_edges(e.as_slice().expect("contiguous"), q);
    let fitted: Vec<(BcmReplicate, usize)> = resamples
        .par_iter()
        .enumerate()
        .map(|(r, rows)| -> Result<(BcmReplicate, usize)> {
            let x = data.covariates().select(Axis(0), rows);
            let t: Vec<u8> = rows.iter().map(|&i| data.treatment()[i]).collect();
            let y: Vec<f64> = rows.iter().map(|&i| data.outcome()[i]).collect();
            let eb: Vec<f64> = rows.iter().map(|&i| e[i]).collect();
            let stratum: Vec<usize> = eb.iter().map(|&v| stratum_of(&edges, v)).collect();
            let (group_of_stratum, merges) = merge_strata(&stratum, &t, &eb, q);
            let n_groups = group_of_stratum.iter().max().map_or(1, |g| g + 1);
            let mut groups = vec![Vec::new(); n_groups];
            for (i, &s) in stratum.iter().enumerate() {
                groups[group_of_stratum[s]].push(i);
            }
            if groups.iter().any(|g| !g.iter().any(|&i| t[i] == 1) || !g.iter().any(|&i| t[i] == 0)) {
                return Err(Error::Fit(format!("bootstrap replicate {r} lacks a treatment arm")));
            }
            let pass = causal_pass(&x, &t, &y, &groups, config, derive_path(seed, &[2, r as u64]))?;
            let arm_rows = |g: &[usize], arm: u8| -> Vec<usize> { g.iter().copied().filter(|&i| t[i] == arm).collect() };
            let coef_treat = groups.iter().map(|g| fit_rows(&pass.design, &y, &arm_rows(g, 1))).collect();
            let coef_control = groups.iter().map(|g| fit_rows(&pass.design, &y, &arm_rows(g, 0))).collect();
            Ok((
                BcmReplicate {
                    basis: pass.basis,
                    group_of_stratum,
                    coef_treat,
                    coef_control,
                },
                merges,
            ))
        })
        .collect::<Result<_>>()?;
    let merged_strata: usize = fitted.iter().map(|(_, m)| m).sum();
    if merged_strata > 0 {
        log::warn!("{merged_strata} propensity strata were merged into a neighbour across replicates");
    }
    Ok(StratifiedBcmFit {
        n_features: data.p(),
        edges,
        propensity,
        replicates: fitted.into_iter().map(|(r, _)| r).collect(),
        merged_strata,
    })
}

impl StratifiedBcmFit {
    /// Structural consistency of a deserialized model.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ArchiveSchema(m.to_string()));
        if self.edges.is_empty() || self.replicates.is_empty() {
            return bad("model has no strata or no replicates");
        }
        for r in &self.replicates {
            check_functions(&r.basis, self.n_features)?;
            if r.group_of_stratum.len() != self.edges.len()
                || r.coef_treat.len() != r.coef_control.len()
                || r.group_of_stratum.iter().any(|&g| g >= r.coef_treat.len())
            {
                return bad("replicate strata do not match its coefficient groups");
            }
            if r.coef_treat.iter().chain(&r.coef_control).any(|c| c.len() != r.basis.len()) {
                return bad("coefficient count differs from basis size");
            }
        }
        Ok(())
    }

    fn score(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_width(x.len())?;
        match &self.propensity {
            Some(m) => Ok(m.predict(x)),
            None => Err(Error::Unsupported(
                "model was fit on supplied propensities; use predict_hte_with_score".into(),
            )),
        }
    }

    fn average(&self, x: &[f64], e: f64, f: impl Fn(&BcmReplicate, usize, &[f64]) -> f64) -> f64 {
        let s = stratum_of(&self.edges, e);
        let total: f64 = self
            .replicates
            .iter()
            .map(|r| f(r, r.group_of_stratum[s], x))
            .sum();
        total / self.replicates.len() as f64
    }

    pub fn predict_hte_with_score(&self, x: ArrayView1<'_, f64>, e: f64) -> Result<f64> {
        self.check_width(x.len())?;
        Ok(self.average(&x.to_vec(), e, |r, g, xs| {
            r.basis
                .iter()
                .zip(r.coef_treat[g].iter().zip(&r.coef_control[g]))
                .map(|(b, (a, c))| (a - c) * b.eval_slice(xs))
                .sum()
        }))
    }

    pub fn predict_outcome_with_score(&self, x: ArrayView1<'_, f64>, arm: Arm, e: f64) -> Result<f64> {
        self.check_width(x.len())?;
        Ok(self.average(&x.to_vec(), e, |r, g, xs| {
            let coef = match arm {
                Arm::Treated => &r.coef_treat[g],
                Arm::Control => &r.coef_control[g],
            };
            linear(&r.basis, coef, xs)
        }))
    }
}

impl HteModel for StratifiedBcmFit {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        let e = self.score(x)?;
        self.predict_hte_with_score(x, e)
    }

    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> Result<f64> {
        let e = self.score(x)?;
        self.predict_outcome_with_score(x, arm, e)
    }
}
