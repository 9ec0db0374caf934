//! Estimator selection and the union of fitted model types.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_bcm, fit_causal_mars, CausalMarsFit, StratifiedBcmFit, DEFAULT_STRATA};
use crate::dataset::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimator::HteModel;
use crate::propensity::fit_propensity;
use crate::rng::derive_seed;
use crate::shrinkage::{fit_scbm, FittedScbm, ScbmConfig, Variant, DEFAULT_REPLICATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Scbm,
    Prop0,
    Prop1,
    Cm,
    Bcm,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Scbm,
        EstimatorKind::Prop0,
        EstimatorKind::Prop1,
        EstimatorKind::Cm,
        EstimatorKind::Bcm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Scbm => "scbm",
            EstimatorKind::Prop0 => "prop0",
            EstimatorKind::Prop1 => "prop1",
            EstimatorKind::Cm => "cm",
            EstimatorKind::Bcm => "bcm",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            EstimatorKind::Scbm => Some(Variant::Scbm),
            EstimatorKind::Prop0 => Some(Variant::Prop0),
            EstimatorKind::Prop1 => Some(Variant::Prop1),
            EstimatorKind::Cm | EstimatorKind::Bcm => None,
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                Error::config(
                    "estimator",
                    format!("unknown estimator {s:?}; expected one of scbm, prop0, prop1, cm, bcm"),
                )
            })
    }
}

/// Tunables for every estimator. The BCM and causal-MARS passes reuse the
/// forward-pass and propensity settings of `scbm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorSettings {
    pub scbm: ScbmConfig,
    pub bcm_replicates: usize,
    pub bcm_strata: usize,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            scbm: ScbmConfig::default(),
            bcm_replicates: DEFAULT_REPLICATES,
            bcm_strata: DEFAULT_STRATA,
        }
    }
}

impl EstimatorSettings {
    pub fn validate(&self) -> Result<()> {
        self.scbm.validate()?;
        if self.bcm_replicates < 1 {
            return Err(Error::config("bcm_replicates", "must be >= 1"));
        }
        if self.bcm_strata < 1 {
            return Err(Error::config("bcm_strata", "must be >= 1"));
        }
        Ok(())
    }

    /// SCBM settings for `kind` with the given seed.
    pub fn scbm_for(&self, kind: EstimatorKind, seed: u64) -> Result<ScbmConfig> {
        let variant = kind
            .variant()
            .ok_or_else(|| Error::config("estimator", format!("{kind} is not an SCBM variant")))?;
        Ok(ScbmConfig {
            variant,
            seed,
            ..self.scbm.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum FittedModel {
    /// SCBM and its prop0/prop1 variants.
    Scbm(FittedScbm),
    Cm(CausalMarsFit),
    Bcm(StratifiedBcmFit),
}

impl FittedModel {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            FittedModel::Scbm(m) => match m.variant {
                Variant::Scbm => EstimatorKind::Scbm,
                Variant::Prop0 => EstimatorKind::Prop0,
                Variant::Prop1 => EstimatorKind::Prop1,
            },
            FittedModel::Cm(_) => EstimatorKind::Cm,
            FittedModel::Bcm(_) => EstimatorKind::Bcm,
        }
    }

    /// Structural consistency of a deserialized model.
    pub fn validate(&self) -> Result<()> {
        match self {
            FittedModel::Scbm(m) => m.validate(),
            FittedModel::Cm(m) => m.validate(),
            FittedModel::Bcm(m) => m.validate(),
        }
    }

    fn inner(&self) -> &dyn HteModel {
        match self {
            FittedModel::Scbm(m) => m,
            FittedModel::Cm(m) => m,
            FittedModel::Bcm(m) => m,
        }
    }
}

impl HteModel for FittedModel {
    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        self.inner().predict_hte(x)
    }

    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> Result<f64> {
        self.inner().predict_outcome(x, arm)
    }
}

/// Fits the named estimator.
pub fn fit_estimator(
    kind: EstimatorKind,
    data: &Dataset,
    settings: &EstimatorSettings,
    seed: u64,
) -> Result<FittedModel> {
    settings.validate()?;
    Ok(match kind {
        EstimatorKind::Scbm | EstimatorKind::Prop0 | EstimatorKind::Prop1 => {
            FittedModel::Scbm(fit_scbm(data, &settings.scbm_for(kind, seed)?)?)
        }
        EstimatorKind::Cm => FittedModel::Cm(fit_causal_mars(data, &settings.scbm.forward)?),
        EstimatorKind::Bcm => {
            let e = fit_propensity(data, &settings.scbm.propensity, derive_seed(seed, 0))?;
            FittedModel::Bcm(fit_bcm(
                data,
                &settings.scbm.forward,
                settings.bcm_replicates,
                settings.bcm_strata,
                &e,
                seed,
            )?)
        }
    })
}
