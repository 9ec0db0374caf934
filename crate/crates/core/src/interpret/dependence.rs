use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimator::HteModel;

pub const DEFAULT_GRID_POINTS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// Empirical quantiles of the column at `k` evenly spaced levels; a 0/1
    /// column uses `{0, 1}`.
    Quantiles(usize),
    Explicit(Vec<f64>),
}

impl Default for Grid {
    fn default() -> Self {
        Grid::Quantiles(DEFAULT_GRID_POINTS)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdTarget {
    #[default]
    Hte,
    Outcome(Arm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialDependenceCurve {
    pub variable: usize,
    pub name: String,
    pub target: PdTarget,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// `k` quantiles of `values` at levels `0, 1/(k-1), ..., 1` with linear
/// interpolation, deduplicated; `{0, 1}` when every value is 0 or 1.
pub fn quantile_grid(values: &[f64], k: usize) -> Result<Vec<f64>> {
    if values.is_empty() || k == 0 {
        return Err(Error::InvalidInput("partial dependence grid is empty".into()));
    }
    if values.iter().all(|v| *v == 0.0 || *v == 1.0) {
        return Ok(vec![0.0, 1.0]);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let last = (sorted.len() - 1) as f64;
    let mut grid: Vec<f64> = (0..k)
        .map(|i| {
            let level = if k == 1 { 0.5 } else { i as f64 / (k - 1) as f64 };
            let pos = level * last;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect();
    grid.dedup();
    Ok(grid)
}

fn explicit_grid(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("partial dependence grid is empty".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("partial dependence grid has non-finite values".into()));
    }
    let mut grid = values.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Mean prediction over all rows of `data` with column `j` set to each grid value.
pub fn partial_dependence<M: HteModel + ?Sized>(
    model: &M,
    data: &Dataset,
    j: usize,
    grid: &Grid,
    target: PdTarget,
) -> Result<PartialDependenceCurve> {
    model.check_width(data.p())?;
    if j >= data.p() {
        return Err(Error::InvalidInput(format!(
            "variable index {j} out of range for {} covariates",
            data.p()
        )));
    }
    let column: Vec<f64> = data.covariates().column(j).to_vec();
    let grid = match grid {
        Grid::Quantiles(k) => quantile_grid(&column, *k)?,
        Grid::Explicit(v) => explicit_grid(v)?,
    };
    let mut x: Array2<f64> = data.covariates().clone();
    let n = data.n() as f64;
    let mut values = Vec::with_capacity(grid.len());
    for &c in &grid {
        x.column_mut(j).fill(c);
        let preds = match target {
            PdTarget::Hte => model.predict_hte_all(&x)?,
            PdTarget::Outcome(arm) => model.predict_outcome_all(&x, arm)?,
        };
        values.push(preds.sum() / n);
    }
    Ok(PartialDependenceCurve {
        variable: j,
        name: data.feature_name(j),
        target,
        grid,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_column_grid() {
        assert_eq!(quantile_grid(&[0.0, 1.0, 1.0, 0.0], 25).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn quantiles_are_increasing() {
        let v: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let g = quantile_grid(&v, 5).unwrap();
        assert_eq!(g, vec![0.0, 25.0, 50.0, 75.0, 100.0]);
        let tied = quantile_grid(&[2.0, 2.0, 2.0, 3.0], 4).unwrap();
        assert!(tied.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(explicit_grid(&[]).is_err());
        assert!(quantile_grid(&[1.0], 0).is_err());
    }
}
