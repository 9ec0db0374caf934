//! Shrinkage causal bagging MARS.
//!
//! 1. Estimate propensities and form the transformed outcome `z`.
//! 2. Run `B` MARS forward passes on bootstrap resamples of `(x, z)`, keeping
//!    only the basis functions, and pool them into one deduplicated collection.
//! 3. Fit the original outcome with a group LASSO over per-basis blocks
//!    `(h_g·1[t=1], h_g·1[t=0])` so each basis enters both arms or neither.
//!
//! The effect estimate is `sum_g (beta_g1 - beta_g0) h_g(x)`.

mod bagging;
mod ridge;

pub use bagging::fit_to_bagging_mars;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{check_functions, evaluate_rows, BasisCollection, BasisFunction};
use crate::dataset::{Arm, Dataset};
use crate::error::{Error, Result};
use crate::estimator::HteModel;
use crate::forward::{forward_pass, ForwardConfig};
use crate::group_lasso::{fit_path_cv, CvPoint, GroupedDesign, PathConfig};
use crate::propensity::{
    fit_propensity, transform_outcome, PropensityConfig, PropensityModel, DEFAULT_CLIP_EPSILON,
};
use crate::rng::{bootstrap_indices, derive_path, derive_seed, rng_from};

pub const DEFAULT_REPLICATES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Scbm,
    /// Transformed-outcome bagging MARS with a LASSO per replicate.
    Prop0,
    /// As `Prop0`, then a joint ridge refit over the pooled basis.
    Prop1,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Scbm => "scbm",
            Variant::Prop0 => "prop0",
            Variant::Prop1 => "prop1",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScbmConfig {
    /// Bootstrap replicate count `B`.
    pub b: usize,
    pub forward: ForwardConfig,
    pub propensity: PropensityConfig,
    pub clip_epsilon: f64,
    pub lasso: PathConfig,
    /// Scale penalized columns to unit root-mean-square before shrinking.
    pub standardize: bool,
    pub variant: Variant,
    pub seed: u64,
}

impl Default for ScbmConfig {
    fn default() -> Self {
        Self {
            b: DEFAULT_REPLICATES,
            forward: ForwardConfig::default(),
            propensity: PropensityConfig::default(),
            clip_epsilon: DEFAULT_CLIP_EPSILON,
            lasso: PathConfig::default(),
            standardize: true,
            variant: Variant::Scbm,
            seed: 0,
        }
    }
}

impl ScbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 1 {
            return Err(Error::config("b", "need at least one bootstrap replicate"));
        }
        if !(0.0..0.5).contains(&self.clip_epsilon) {
            return Err(Error::config(
                "clip_epsilon",
                format!("must lie in [0, 0.5), got {}", self.clip_epsilon),
            ));
        }
        self.forward.validate()?;
        self.propensity.validate()?;
        self.lasso.validate()
    }
}

/// Fitted coefficients, aligned with the basis collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficients {
    PerArm { treated: Vec<f64>, control: Vec<f64> },
    Single { weights: Vec<f64> },
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::PerArm { treated, .. } => treated.len(),
            Coefficients::Single { weights } => weights.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-basis effect coefficient (`beta1 - beta0`, or the single weight).
    pub fn effect(&self) -> Vec<f64> {
        match self {
            Coefficients::PerArm { treated, control } => {
                treated.iter().zip(control).map(|(a, b)| a - b).collect()
            }
            Coefficients::Single { weights } => weights.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FitDiagnostics {
    /// Chosen penalty (group LASSO) or ridge strength.
    pub lambda: Option<f64>,
    pub lambda_1se: Option<f64>,
    pub cv_curve: Vec<CvPoint>,
    /// Non-intercept basis functions with a nonzero coefficient.
    pub active_groups: usize,
    /// Basis functions dropped because they vanish on one arm.
    pub pruned: usize,
    /// Distinct basis functions produced by the bootstrap passes.
    pub generated: usize,
    pub kkt_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedScbm {
    pub variant: Variant,
    pub n_features: usize,
    pub basis: BasisCollection,
    pub coefficients: Coefficients,
    /// Absent when propensities were supplied directly.
    pub propensity: Option<PropensityModel>,
    /// Column divisors used by the penalized solve, two per basis for `PerArm`.
    pub column_scale: Vec<f64>,
    pub config: ScbmConfig,
    pub diagnostics: FitDiagnostics,
}

impl FittedScbm {
    /// Basis evaluations at `x`.
    fn basis_values(&self, x: ArrayView1<'_, f64>) -> Result<Vec<f64>> {
        self.check_width(x.len())?;
        let xs = x.to_vec();
        Ok(self
            .basis
            .functions()
            .iter()
            .map(|b| b.eval_slice(&xs))
            .collect())
    }

    /// Structural consistency of a deserialized model.
    pub fn validate(&self) -> Result<()> {
        check_functions(self.basis.functions(), self.n_features)?;
        let ok = match &self.coefficients {
            Coefficients::PerArm { treated, control } => {
                treated.len() == self.basis.len() && control.len() == self.basis.len()
            }
            Coefficients::Single { weights } => weights.len() == self.basis.len(),
        };
        if !ok {
            return Err(Error::ArchiveSchema("coefficient count differs from basis size".into()));
        }
        Ok(())
    }

    /// Intercept-only fits carry no heterogeneity.
    pub fn is_degenerate(&self) -> bool {
        self.diagnostics.active_groups == 0
    }
}

impl HteModel for FittedScbm {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_hte(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        let h = self.basis_values(x)?;
        Ok(match &self.coefficients {
            Coefficients::PerArm { treated, control } => h
                .iter()
                .zip(treated.iter().zip(control))
                .map(|(hv, (a, b))| (a - b) * hv)
                .sum(),
            Coefficients::Single { weights } => h.iter().zip(weights).map(|(hv, w)| w * hv).sum(),
        })
    }

    fn predict_outcome(&self, x: ArrayView1<'_, f64>, arm: Arm) -> Result<f64> {
        let Coefficients::PerArm { treated, control } = &self.coefficients else {
            return Err(Error::Unsupported(format!(
                "{} models estimate the effect directly and have no outcome model",
                self.variant.name()
            )));
        };
        let h = self.basis_values(x)?;
        let beta = match arm {
            Arm::Treated => treated,
            Arm::Control => control,
        };
        Ok(h.iter().zip(beta).map(|(hv, b)| hv * b).sum())
    }
}

/// Fits SCBM (or the prop0/prop1 variants, per `config.variant`).
pub fn fit_scbm(data: &Dataset, config: &ScbmConfig) -> Result<FittedScbm> {
    config.validate()?;
    data.require_both_arms()?;
    let model = fit_propensity(data, &config.propensity, derive_seed(config.seed, 0))?;
    let e = model.predict_all(data.covariates());
    fit_scbm_with_scores(data, config, &e, Some(model))
}

/// As [`fit_scbm`] with propensities given per training row.
pub fn fit_scbm_with_scores(
    data: &Dataset,
    config: &ScbmConfig,
    e_hat: &Array1<f64>,
    propensity: Option<PropensityModel>,
) -> Result<FittedScbm> {
    config.validate()?;
    data.require_both_arms()?;
    let resamples = draw_resamples(data.n(), config);
    fit_on_resamples(data, config, e_hat, propensity, &resamples)
}

/// Bootstrap row sets, one per replicate, each from its own derived seed.
pub fn draw_resamples(n: usize, config: &ScbmConfig) -> Vec<Vec<usize>> {
    (0..config.b)
        .map(|b| {
            let mut rng = rng_from(derive_path(config.seed, &[1, b as u64]));
            bootstrap_indices(n, &mut rng)
        })
        .collect()
}

/// Full pipeline on explicitly supplied resamples.
pub fn fit_on_resamples(
    data: &Dataset,
    config: &ScbmConfig,
    e_hat: &Array1<f64>,
    propensity: Option<PropensityModel>,
    resamples: &[Vec<usize>],
) -> Result<FittedScbm> {
    config.validate()?;
    data.require_both_arms()?;
    let tz = transform_outcome(data, e_hat, config.clip_epsilon)?;
    match config.variant {
        Variant::Scbm => {
            let replicate_bases = bootstrap_bases(data.covariates(), &tz.z, &config.forward, config.seed, resamples)?;
            let mut basis = BasisCollection::new();
            for (r, fns) in replicate_bases.into_iter().enumerate() {
                for f in fns {
                    basis.insert(f, r);
                }
            }
            fit_shared_basis(data, config, basis, propensity)
        }
        Variant::Prop0 | Variant::Prop1 => {
            bagging::fit_transformed(data, config, &tz.z, propensity, resamples)
        }
    }
}

/// Basis functions from forward passes on each resample of `(x, z)`.
pub(crate) fn bootstrap_bases(
    x: &Array2<f64>,
    z: &Array1<f64>,
    forward: &ForwardConfig,
    seed: u64,
    resamples: &[Vec<usize>],
) -> Result<Vec<Vec<BasisFunction>>> {
    resamples
        .par_iter()
        .enumerate()
        .map(|(b, rows)| {
            let xb = x.select(Axis(0), rows);
            let zb = z.select(Axis(0), rows);
            let fit = forward_pass(&xb, zb.view(), forward, derive_path(seed, &[2, b as u64]))?;
            Ok(fit.basis)
        })
        .collect()
}

/// Basis columns on `x`, one per function.
pub(crate) fn basis_columns(basis: &BasisCollection, x: &Array2<f64>) -> Vec<Vec<f64>> {
    basis
        .functions()
        .par_iter()
        .map(|b| evaluate_rows(b, x).to_vec())
        .collect()
}

/// Keeps the constant and every function that is nonzero somewhere in both arms.
pub(crate) fn prune_one_arm(basis: &BasisCollection, columns: &[Vec<f64>], t: &[u8]) -> Vec<bool> {
    columns
        .iter()
        .zip(basis.functions())
        .map(|(c, f)| {
            f.is_constant() || {
                let on = |arm: u8| c.iter().zip(t).any(|(v, &ti)| ti == arm && *v != 0.0);
                on(0) && on(1)
            }
        })
        .collect()
}

/// Group-LASSO stage on the original outcome over a given basis collection.
pub fn fit_shared_basis(
    data: &Dataset,
    config: &ScbmConfig,
    basis: BasisCollection,
    propensity: Option<PropensityModel>,
) -> Result<FittedScbm> {
    config.validate()?;
    data.require_both_arms()?;
    let generated = basis.len();
    let t: Vec<u8> = data.treatment().to_vec();
    let columns = basis_columns(&basis, data.covariates());
    let keep = prune_one_arm(&basis, &columns, &t);
    let basis = basis.retain_indices(&keep);
    let columns: Vec<Vec<f64>> = columns
        .into_iter()
        .zip(&keep)
        .filter_map(|(c, &k)| k.then_some(c))
        .collect();
    let pruned = generated - basis.len();

    let design = GroupedDesign::treatment_blocks(&columns, &t, &[0], config.standardize)?;
    let y = data.outcome().to_vec();
    let cv = fit_path_cv(&design, &y, &t, &config.lasso, derive_seed(config.seed, 3))?;
    let (treated, control): (Vec<f64>, Vec<f64>) =
        cv.solution.beta.iter().map(|b| (b[0], b[1])).unzip();
    let active = cv.solution.active_groups().saturating_sub(1);
    if active == 0 {
        log::warn!("no basis function survived shrinkage; the effect estimate is constant");
    }
    Ok(FittedScbm {
        variant: Variant::Scbm,
        n_features: data.p(),
        basis,
        coefficients: Coefficients::PerArm { treated, control },
        propensity,
        column_scale: design.scale().to_vec(),
        config: config.clone(),
        diagnostics: FitDiagnostics {
            lambda: Some(cv.lambda),
            lambda_1se: Some(cv.lambda_1se),
            cv_curve: cv.curve,
            active_groups: active,
            pruned,
            generated,
            kkt_residual: Some(cv.solution.kkt_residual),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{HingeTerm, Sign};
    use ndarray::array;

    fn hand_model() -> FittedScbm {
        let mut basis = BasisCollection::new();
        basis.insert(
            BasisFunction::new(vec![HingeTerm::new(0, Sign::Positive, 1.0)]).unwrap(),
            0,
        );
        basis.insert(
            BasisFunction::new(vec![
                HingeTerm::new(0, Sign::Negative, 2.0),
                HingeTerm::new(1, Sign::Positive, 0.0),
            ])
            .unwrap(),
            0,
        );
        FittedScbm {
            variant: Variant::Scbm,
            n_features: 2,
            basis,
            coefficients: Coefficients::PerArm {
                treated: vec![1.0, 2.0, -1.0],
                control: vec![0.5, 0.5, 1.0],
            },
            propensity: None,
            column_scale: vec![1.0; 6],
            config: ScbmConfig::default(),
            diagnostics: FitDiagnostics::default(),
        }
    }

    #[test]
    fn hand_built_prediction() {
        let m = hand_model();
        // h1 = max(0, 3-1) = 2, h2 = max(0, 2-3)*max(0, 0.5) = 0
        assert_eq!(m.predict_hte(array![3.0, 0.5].view()).unwrap(), 0.5 + 1.5 * 2.0);
        // h1 = 0, h2 = (2-0.5)*1.5 = 2.25
        assert_eq!(m.predict_hte(array![0.5, 1.5].view()).unwrap(), 0.5 - 2.0 * 2.25);
        let x = array![0.7, 2.0];
        let diff = m.predict_outcome(x.view(), Arm::Treated).unwrap()
            - m.predict_outcome(x.view(), Arm::Control).unwrap();
        assert_eq!(diff, m.predict_hte(x.view()).unwrap());
        assert!(m.predict_hte(array![1.0].view()).is_err());
    }

    #[test]
    fn single_weight_models_have_no_outcome() {
        let mut m = hand_model();
        m.variant = Variant::Prop0;
        m.coefficients = Coefficients::Single {
            weights: vec![1.0, 0.0, 0.0],
        };
        assert!(matches!(
            m.predict_outcome(array![0.0, 0.0].view(), Arm::Treated),
            Err(Error::Unsupported(_))
        ));
        assert_eq!(m.predict_hte(array![0.0, 0.0].view()).unwrap(), 1.0);
    }

    #[test]
    fn config_validation() {
        let bad = ScbmConfig {
            b: 0,
            ..ScbmConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScbmConfig {
            clip_epsilon: 0.7,
            ..ScbmConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
