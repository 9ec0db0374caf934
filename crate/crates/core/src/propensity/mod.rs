//! Propensity scores and the inverse-probability-weighted transformed outcome.
//!
//! The transformed outcome for individual `i` is
//!
//! ```text
//! z_i = y_i / e(x_i)          if t_i = 1
//! z_i = -y_i / (1 - e(x_i))   if t_i = 0
//! ```
//!
//! Under unconfoundedness `E[z | x] = tau(x)`, so any regression of `z` on `x`
//! targets the treatment effect directly. Propensities are clipped into
//! `[eps, 1 - eps]` before dividing.

mod forest;
mod logistic;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

pub use forest::{ForestParams, ProbabilityTree, RandomForest};
pub use logistic::LogisticModel;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_CLIP_EPSILON: f64 = 0.01;
pub const DEFAULT_LOGISTIC_RIDGE: f64 = 1e-4;

/// How propensity scores are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropensityConfig {
    /// A known assignment probability, e.g. 1/2 in a randomized trial.
    Known { value: f64 },
    Logistic {
        #[serde(default = "default_ridge")]
        ridge: f64,
    },
    RandomForest(#[serde(default)] ForestParams),
}

impl std::str::FromStr for PropensityConfig {
    type Err = Error;

    /// Parses `rf`, `logistic` or `known:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        let cfg = match s.trim() {
            "rf" | "random_forest" => PropensityConfig::RandomForest(ForestParams::default()),
            "logistic" => PropensityConfig::Logistic {
                ridge: DEFAULT_LOGISTIC_RIDGE,
            },
            other => {
                let value = other
                    .strip_prefix("known:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::config("propensity", format!("expected rf, logistic or known:<value>, got {other:?}"))
                    })?;
                PropensityConfig::Known { value }
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_ridge() -> f64 {
    DEFAULT_LOGISTIC_RIDGE
}

impl Default for PropensityConfig {
    fn default() -> Self {
        PropensityConfig::RandomForest(ForestParams::default())
    }
}

impl PropensityConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            PropensityConfig::Known { value } => {
                if !(*value > 0.0 && *value < 1.0) {
                    return Err(Error::config(
                        "propensity.value",
                        format!("known propensity must lie in (0, 1), got {value}"),
                    ));
                }
            }
            PropensityConfig::Logistic { ridge } => {
                if !(*ridge >= 0.0) || !ridge.is_finite() {
                    return Err(Error::config(
                        "propensity.ridge",
                        format!("ridge strength must be finite and >= 0, got {ridge}"),
                    ));
                }
            }
            PropensityConfig::RandomForest(p) => {
                if p.n_trees == 0 {
                    return Err(Error::config("propensity.n_trees", "need at least one tree"));
                }
                if p.min_leaf == 0 {
                    return Err(Error::config("propensity.min_leaf", "must be >= 1"));
                }
                if p.mtry == Some(0) {
                    return Err(Error::config("propensity.mtry", "must be >= 1"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropensityModel {
    Known { value: f64 },
    Logistic(LogisticModel),
    RandomForest(RandomForest),
}

impl PropensityModel {
    /// `P(t = 1 | x)`.
    pub fn predict(&self, x: ArrayView1<'_, f64>) -> f64 {
        match self {
            PropensityModel::Known { value } => *value,
            PropensityModel::Logistic(m) => m.predict(x),
            PropensityModel::RandomForest(f) => f.predict(x),
        }
    }

    pub fn predict_all(&self, x: &Array2<f64>) -> Array1<f64> {
        x.rows().into_iter().map(|r| self.predict(r)).collect()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PropensityModel::Known { .. } => "known",
            PropensityModel::Logistic(_) => "logistic",
            PropensityModel::RandomForest(_) => "random_forest",
        }
    }
}

pub fn fit_propensity(data: &Dataset, config: &PropensityConfig, seed: u64) -> Result<PropensityModel> {
    config.validate()?;
    data.require_both_arms()?;
    let t = data.treatment().to_vec();
    Ok(match config {
        PropensityConfig::Known { value } => PropensityModel::Known { value: *value },
        PropensityConfig::Logistic { ridge } => {
            PropensityModel::Logistic(LogisticModel::fit(data.covariates(), &t, *ridge)?)
        }
        PropensityConfig::RandomForest(params) => {
            PropensityModel::RandomForest(RandomForest::fit(data.covariates(), &t, *params, seed))
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedOutcome {
    pub z: Array1<f64>,
    pub clip_epsilon: f64,
    pub propensity_used: Array1<f64>,
}

/// Clips `e_hat` into `[eps, 1 - eps]` and forms the signed IPW outcome.
///
/// `clip_epsilon = 0` disables clipping; every propensity must then lie strictly
/// inside `(0, 1)`.
pub fn transform_outcome(
    data: &Dataset,
    e_hat: &Array1<f64>,
    clip_epsilon: f64,
) -> Result<TransformedOutcome> {
    if !(0.0..0.5).contains(&clip_epsilon) {
        return Err(Error::config(
            "clip_epsilon",
            format!("must lie in [0, 0.5), got {clip_epsilon}"),
        ));
    }
    if e_hat.len() != data.n() {
        return Err(Error::DimensionMismatch {
            expected: data.n(),
            got: e_hat.len(),
        });
    }
    let mut used = Array1::zeros(data.n());
    let mut z = Array1::zeros(data.n());
    for i in 0..data.n() {
        let e = e_hat[i];
        if !e.is_finite() {
            return Err(Error::InvalidInput(format!("propensity at row {i} is {e}")));
        }
        let e = e.clamp(clip_epsilon, 1.0 - clip_epsilon);
        if e <= 0.0 || e >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "propensity at row {i} is {e}; use a positive clip epsilon"
            )));
        }
        used[i] = e;
        let y = data.outcome()[i];
        z[i] = if data.treatment()[i] == 1 {
            y / e
        } else {
            -y / (1.0 - e)
        };
    }
    Ok(TransformedOutcome {
        z,
        clip_epsilon,
        propensity_used: used,
    })
}
