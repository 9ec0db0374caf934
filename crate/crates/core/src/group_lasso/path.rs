//! Regularization path and K-fold cross-validation.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GroupLassoSolution, GroupedDesign, Solver, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub n_lambda: usize,
    /// Smallest lambda on the path as a fraction of `lambda_max`.
    pub lambda_min_ratio: f64,
    pub folds: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            n_lambda: 100,
            lambda_min_ratio: 1e-3,
            folds: 10,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_lambda < 1 {
            return Err(Error::config("n_lambda", "must be >= 1"));
        }
        if !(self.lambda_min_ratio > 0.0 && self.lambda_min_ratio < 1.0) {
            return Err(Error::config(
                "lambda_min_ratio",
                format!("must lie in (0, 1), got {}", self.lambda_min_ratio),
            ));
        }
        if self.folds < 2 {
            return Err(Error::config("folds", "must be >= 2"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("tol", "must be > 0"));
        }
        if self.max_iter < 1 {
            return Err(Error::config("max_iter", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub lambda: f64,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Lambda minimizing the cross-validated error.
    pub lambda: f64,
    /// Largest lambda within one standard error of the minimum.
    pub lambda_1se: f64,
    /// Full-data fit at `lambda`.
    pub solution: GroupLassoSolution,
    pub curve: Vec<CvPoint>,
}

/// Log-spaced decreasing path from `lambda_max` down to `ratio * lambda_max`.
pub fn lambda_path(lambda_max: f64, n_lambda: usize, ratio: f64) -> Vec<f64> {
    if n_lambda == 1 || lambda_max == 0.0 {
        return vec![lambda_max];
    }
    let step = ratio.ln() / (n_lambda - 1) as f64;
    (0..n_lambda)
        .map(|k| lambda_max * (step * k as f64).exp())
        .collect()
}

/// Fold label per row, dealt round-robin within each stratum after shuffling.
pub(crate) fn stratified_folds(strata: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_from(seed);
    let mut labels = vec![0; strata.len()];
    let mut levels: Vec<u8> = strata.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let mut offset = 0;
    for level in levels {
        let mut rows: Vec<usize> = (0..strata.len()).filter(|&i| strata[i] == level).collect();
        rows.shuffle(&mut rng);
        for (k, i) in rows.into_iter().enumerate() {
            labels[i] = (k + offset) % folds;
        }
        offset += 1;
    }
    labels
}

/// Fraction of variance explained at which a path stops early.
pub const SATURATION: f64 = 0.999;

/// Solutions along `lambdas` with warm starts. The path stops once the fit
/// explains a `SATURATION` share of the variance or uses as many nonzero
/// columns as there are rows, and before the first lambda that fails to
/// converge; the error is returned when no lambda converged.
fn warm_path(
    design: &GroupedDesign,
    y: &[f64],
    lambdas: &[f64],
    cfg: &PathConfig,
) -> Result<Vec<GroupLassoSolution>> {
    let mut solver = Solver::new(design, y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let total: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        match solver.run(lambda, cfg.tol, cfg.max_iter) {
            Ok(sol) => {
                let width: usize = sol
                    .beta
                    .iter()
                    .filter(|b| b.iter().any(|v| *v != 0.0))
                    .map(Vec::len)
                    .sum();
                let saturated = solver.rss() <= (1.0 - SATURATION) * total || width >= y.len();
                out.push(sol);
                if saturated {
                    break;
                }
            }
            Err(e @ Error::Convergence { .. }) => {
                if out.is_empty() {
                    return Err(e);
                }
                log::warn!("group lasso path stopped at lambda {lambda:.3e}: {e}");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Cross-validates lambda over a log-spaced path and refits on all rows.
///
/// Folds are stratified by `strata` (typically the treatment indicator).
pub fn fit_path_cv(
    design: &GroupedDesign,
    y: &[f64],
    strata: &[u8],
    cfg: &PathConfig,
    seed: u64,
) -> Result<CvResult> {
    cfg.validate()?;
    if strata.len() != design.n() {
        return Err(Error::DimensionMismatch {
            expected: design.n(),
            got: strata.len(),
        });
    }
    let n = design.n();
    let folds = cfg.folds.min(n);
    if folds < 2 {
        return Err(Error::InvalidInput("need at least two rows for cross-validation".into()));
    }
    let lmax = Solver::new(design, y)?.lambda_max();
    let lambdas = lambda_path(lmax, cfg.n_lambda, cfg.lambda_min_ratio);
    let labels = stratified_folds(strata, folds, derive_seed(seed, 0));

    let fold_errors: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| -> Result<Vec<f64>> {
            let train: Vec<usize> = (0..n).filter(|&i| labels[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| labels[i] == f).collect();
            if test.is_empty() {
                return Ok(Vec::new());
            }
            let train_design = design.subset(&train);
            let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let test_design = design.subset(&test);
            let path = warm_path(&train_design, &train_y, &lambdas, cfg)?;
            Ok(path
                .iter()
                .map(|sol| {
                    let fit = test_design.predict(&sol.beta);
                    test.iter()
                        .zip(&fit)
                        .map(|(&i, f)| (y[i] - f).powi(2))
                        .sum::<f64>()
                        / test.len() as f64
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|v| !v.is_empty())
        .collect();

    let k = fold_errors.len() as f64;
    let reached = fold_errors.iter().map(Vec::len).min().unwrap_or(0);
    let curve: Vec<CvPoint> = lambdas[..reached]
        .iter()
        .enumerate()
        .map(|(l, &lambda)| {
            let vals: Vec<f64> = fold_errors.iter().map(|e| e[l]).collect();
            let mean = vals.iter().sum::<f64>() / k;
            let var = if k > 1.0 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            CvPoint {
                lambda,
                mean_error: mean,
                std_error: (var / k).sqrt(),
            }
        })
        .collect();

    // first minimum along the decreasing path keeps the larger lambda on ties
    let best = curve
        .iter()
        .enumerate()
        .fold(0, |b, (l, p)| if p.mean_error < curve[b].mean_error { l } else { b });
    let bound = curve[best].mean_error + curve[best].std_error;
    let one_se = curve.iter().position(|p| p.mean_error <= bound).unwrap_or(best);

    let full = warm_path(design, y, &lambdas[..=best], cfg)?;
    let solution = full.into_iter().last().expect("path is non-empty");
    Ok(CvResult {
        lambda: solution.lambda,
        lambda_1se: lambdas[one_se],
        solution,
        curve,
    })
}
