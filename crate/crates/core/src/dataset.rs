//! Tabular causal data: covariates, a binary treatment indicator and an outcome.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Treatment arm of an individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Arm {
    Control,
    Treated,
}

impl Arm {
    pub fn from_indicator(t: u8) -> Result<Self> {
        match t {
            0 => Ok(Arm::Control),
            1 => Ok(Arm::Treated),
            other => Err(Error::InvalidInput(format!(
                "treatment indicator must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn indicator(self) -> u8 {
        match self {
            Arm::Control => 0,
            Arm::Treated => 1,
        }
    }
}

/// `n` individuals with `p` covariates, a 0/1 treatment and a real outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    covariates: Array2<f64>,
    treatment: Array1<u8>,
    outcome: Array1<f64>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        covariates: Array2<f64>,
        treatment: Array1<u8>,
        outcome: Array1<f64>,
    ) -> Result<Self> {
        let (n, p) = covariates.dim();
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput(format!(
                "dataset must have at least one row and one covariate, got {n}x{p}"
            )));
        }
        if treatment.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: treatment.len(),
            });
        }
        if outcome.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: outcome.len(),
            });
        }
        if let Some(i) = treatment.iter().position(|&t| t > 1) {
            return Err(Error::InvalidInput(format!(
                "treatment at row {i} is {}, expected 0 or 1",
                treatment[i]
            )));
        }
        for ((i, j), v) in covariates.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite covariate {v} at row {i}, column {j}"
                )));
            }
        }
        if let Some(i) = outcome.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite outcome {} at row {i}",
                outcome[i]
            )));
        }
        Ok(Self {
            covariates,
            treatment,
            outcome,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.covariates.nrows()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn covariates(&self) -> &Array2<f64> {
        &self.covariates
    }

    pub fn treatment(&self) -> &Array1<u8> {
        &self.treatment
    }

    pub fn outcome(&self) -> &Array1<f64> {
        &self.outcome
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Name of covariate `j`, falling back to `x{j+1}`.
    pub fn feature_name(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => format!("x{}", j + 1),
        }
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.covariates.row(i)
    }

    pub fn arm_counts(&self) -> (usize, usize) {
        let treated = self.treatment.iter().filter(|&&t| t == 1).count();
        (self.n() - treated, treated)
    }

    /// Fails unless both arms have at least one individual.
    pub fn require_both_arms(&self) -> Result<()> {
        let (control, treated) = self.arm_counts();
        if control == 0 || treated == 0 {
            return Err(Error::Fit(format!(
                "causal fit needs both arms, got {treated} treated and {control} control"
            )));
        }
        Ok(())
    }

    /// Rows `idx` in the given order; repeats are allowed (bootstrap).
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            covariates: self.covariates.select(Axis(0), idx),
            treatment: self.treatment.select(Axis(0), idx),
            outcome: self.outcome.select(Axis(0), idx),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same covariates and treatment with a replaced outcome vector.
    pub fn with_outcome(&self, outcome: Array1<f64>) -> Result<Dataset> {
        let mut out = Dataset::new(self.covariates.clone(), self.treatment.clone(), outcome)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }
}
