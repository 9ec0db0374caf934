//! Prediction interface shared by every fitted HTE estimator.

use ndarray::{Array1, Array2, ArrayView1};

use crate::dataset::Arm;
use crate::error::{Error, Result};

pub trait HteModel {
    /// Number of covariates the model was trained on.
    fn n_features(&self) -> usize;

    /// Estimated treatment effect at `x`.
    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> Result<f64>;

    /// Arm-specific conditional mean, for models that have one.
    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> Result<f64>;

    fn predict_hte_all(&self, x: &Array2<f64>) -> Result<Array1<f64>> {
        self.check_width(x.ncols())?;
        x.rows().into_iter().map(|r| self.predict_hte(r)).collect()
    }

    fn predict_outcome_all(&self, x: &Array2<f64>, arm: Arm) -> Result<Array1<f64>> {
        self.check_width(x.ncols())?;
        x.rows().into_iter().map(|r| self.predict_outcome(r, arm)).collect()
    }

    fn check_width(&self, p: usize) -> Result<()> {
        if p != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: p,
            });
        }
        Ok(())
    }
}
