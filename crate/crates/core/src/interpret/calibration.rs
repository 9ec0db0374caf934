use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::HteModel;
use crate::propensity::{fit_propensity, PropensityConfig};
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AteWeighting {
    /// Difference of arm-wise outcome means.
    #[default]
    Plain,
    /// Inverse-propensity-weighted (Hajek) means, with the propensity fit on
    /// the training part and clipped to `[clip, 1 - clip]`.
    Iptw { propensity: PropensityConfig, clip: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    /// Number of subgroups.
    pub k: usize,
    pub replications: usize,
    /// Share of rows held out for scoring.
    pub holdout: f64,
    pub weighting: AteWeighting,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            k: 9,
            replications: 100,
            holdout: 0.5,
            weighting: AteWeighting::Plain,
            seed: 0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config("k", "need at least two subgroups"));
        }
        if self.replications < 1 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        if !(self.holdout > 0.0 && self.holdout < 1.0) {
            return Err(Error::config("holdout", format!("must lie in (0, 1), got {}", self.holdout)));
        }
        if let AteWeighting::Iptw { propensity, clip } = &self.weighting {
            propensity.validate()?;
            if !(*clip >= 0.0 && *clip < 0.5) {
                return Err(Error::config("clip", format!("must lie in [0, 0.5), got {clip}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupStats {
    pub mean_tau_hat: f64,
    /// `None` when the subgroup lacks one of the arms.
    pub ate: Option<f64>,
    pub treated: usize,
    pub control: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReplicate {
    pub seed: u64,
    pub subgroups: Vec<SubgroupStats>,
    /// Rank correlation between subgroup mean estimate and subgroup ATE.
    pub spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub config: CalibrationConfig,
    pub replicates: Vec<CalibrationReplicate>,
    /// Per-subgroup mean estimate averaged over replications.
    pub mean_tau_hat: Vec<f64>,
    /// Per-subgroup ATE averaged over the replications where it exists.
    pub mean_ate: Vec<Option<f64>>,
    /// Rank correlation of the two averaged curves.
    pub spearman: Option<f64>,
}

/// Ranks starting at 1, ties sharing their average rank.
fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; `None` with fewer than two points or a constant input.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

/// Spearman over the pairs where the ATE exists.
fn paired_spearman(subgroups: &[SubgroupStats]) -> Option<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = subgroups
        .iter()
        .filter_map(|s| s.ate.map(|ate| (s.mean_tau_hat, ate)))
        .unzip();
    spearman(&a, &b)
}

fn arm_mean(rows: &[usize], y: &[f64], w: &[f64]) -> f64 {
    let total: f64 = rows.iter().map(|&i| w[i]).sum();
    rows.iter().map(|&i| w[i] * y[i]).sum::<f64>() / total
}

fn subgroup(rows: &[usize], tau_hat: &[f64], t: &[u8], y: &[f64], w1: &[f64], w0: &[f64]) -> SubgroupStats {
    let treated: Vec<usize> = rows.iter().copied().filter(|&i| t[i] == 1).collect();
    let control: Vec<usize> = rows.iter().copied().filter(|&i| t[i] == 0).collect();
    let ate = (!treated.is_empty() && !control.is_empty())
        .then(|| arm_mean(&treated, y, w1) - arm_mean(&control, y, w0));
    SubgroupStats {
        mean_tau_hat: rows.iter().map(|&i| tau_hat[i]).sum::<f64>() / rows.len() as f64,
        ate,
        treated: treated.len(),
        control: control.len(),
    }
}

fn replicate<M, F>(data: &Dataset, config: &CalibrationConfig, fit: &F, seed: u64) -> Result<CalibrationReplicate>
where
    M: HteModel,
    F: Fn(&Dataset, u64) -> Result<M> + Sync,
{
    let n = data.n();
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng_from(derive_seed(seed, 0)));
    let n_hold = ((n as f64) * config.holdout).round() as usize;
    let (held, train) = rows.split_at(n_hold);
    let train = data.select_rows(train);
    let test = data.select_rows(held);
    let model = fit(&train, derive_seed(seed, 1))?;
    let tau_hat = model.predict_hte_all(test.covariates())?.to_vec();
    let t: Vec<u8> = test.treatment().to_vec();
    let y: Vec<f64> = test.outcome().to_vec();
    let (w1, w0) = match &config.weighting {
        AteWeighting::Plain => (vec![1.0; test.n()], vec![1.0; test.n()]),
        AteWeighting::Iptw { propensity, clip } => {
            let e = fit_propensity(&train, propensity, derive_seed(seed, 2))?
                .predict_all(test.covariates())
                .mapv(|v| v.clamp(*clip, 1.0 - clip));
            (e.iter().map(|v| 1.0 / v).collect(), e.iter().map(|v| 1.0 / (1.0 - v)).collect())
        }
    };
    let mut order: Vec<usize> = (0..test.n()).collect();
    order.sort_by(|&a, &b| tau_hat[a].total_cmp(&tau_hat[b]));
    let m = order.len();
    let subgroups: Vec<SubgroupStats> = (0..config.k)
        .map(|g| subgroup(&order[g * m / config.k..(g + 1) * m / config.k], &tau_hat, &t, &y, &w1, &w0))
        .collect();
    debug_assert!(subgroups.windows(2).all(|w| w[0].mean_tau_hat <= w[1].mean_tau_hat + 1e-12));
    Ok(CalibrationReplicate {
        seed,
        spearman: paired_spearman(&subgroups),
        subgroups,
    })
}

/// Sorted-subgroup calibration: per replication, fit on a random part of the
/// rows, sort the held-out rows by estimated effect, cut them into `k`
/// equal slices and compare each slice's mean estimate with its observed ATE.
///
/// `fit` receives the training rows and a derived seed.
pub fn subgroup_calibration<M, F>(data: &Dataset, config: &CalibrationConfig, fit: F) -> Result<CalibrationReport>
where
    M: HteModel,
    F: Fn(&Dataset, u64) -> Result<M> + Sync,
{
    config.validate()?;
    let n_hold = ((data.n() as f64) * config.holdout).round() as usize;
    if n_hold < config.k || n_hold == data.n() {
        return Err(Error::InvalidInput(format!(
            "{} rows with holdout {} leave {n_hold} held-out rows for {} subgroups",
            data.n(),
            config.holdout,
            config.k
        )));
    }
    let replicates: Vec<CalibrationReplicate> = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate(data, config, &fit, derive_seed(config.seed, r as u64)))
        .collect::<Result<_>>()?;
    let reps = replicates.len() as f64;
    let mean_tau_hat: Vec<f64> = (0..config.k)
        .map(|g| replicates.iter().map(|r| r.subgroups[g].mean_tau_hat).sum::<f64>() / reps)
        .collect();
    let mean_ate: Vec<Option<f64>> = (0..config.k)
        .map(|g| {
            let vals: Vec<f64> = replicates.iter().filter_map(|r| r.subgroups[g].ate).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    let averaged: Vec<SubgroupStats> = mean_tau_hat
        .iter()
        .zip(&mean_ate)
        .map(|(m, a)| SubgroupStats {
            mean_tau_hat: *m,
            ate: *a,
            treated: 0,
            control: 0,
        })
        .collect();
    Ok(CalibrationReport {
        config: config.clone(),
        spearman: paired_spearman(&averaged),
        replicates,
        mean_tau_hat,
        mean_ate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_extremes() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&a, &[10.0, 20.0, 30.0, 40.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&a, &[1.0, 1.0, 1.0, 1.0]), None);
        assert_eq!(spearman(&a[..1], &a[..1]), None);
    }

    #[test]
    fn single_arm_subgroup_is_missing() {
        let t = [1, 1, 0];
        let y = [1.0, 2.0, 0.0];
        let w = [1.0; 3];
        let s = subgroup(&[0, 1], &[0.0, 1.0, 2.0], &t, &y, &w, &w);
        assert_eq!(s.ate, None);
        assert_eq!(s.treated, 2);
        let s = subgroup(&[0, 1, 2], &[0.0, 1.0, 2.0], &t, &y, &w, &w);
        assert_eq!(s.ate, Some(1.5));
    }
}
