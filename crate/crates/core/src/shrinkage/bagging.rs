//! Transformed-outcome bagging MARS (`prop0`, `prop1`).

use ndarray::Array1;
use rayon::prelude::*;

use super::{
    basis_columns, bootstrap_bases, fit_scbm, ridge, Coefficients, FitDiagnostics, FittedScbm,
    ScbmConfig, Variant,
};
use crate::basis::BasisCollection;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::group_lasso::{fit_path_cv, stratified_folds, GroupedDesign};
use crate::propensity::PropensityModel;
use crate::rng::{derive_path, derive_seed};

/// Fits the `prop0` or `prop1` reference variant.
pub fn fit_to_bagging_mars(data: &Dataset, config: &ScbmConfig) -> Result<FittedScbm> {
    if config.variant == Variant::Scbm {
        return Err(Error::config("variant", "expected prop0 or prop1"));
    }
    fit_scbm(data, config)
}

pub(super) fn fit_transformed(
    data: &Dataset,
    config: &ScbmConfig,
    z: &Array1<f64>,
    propensity: Option<PropensityModel>,
    resamples: &[Vec<usize>],
) -> Result<FittedScbm> {
    let x = data.covariates();
    let t: Vec<u8> = data.treatment().to_vec();
    let zs = z.to_vec();
    let bases = bootstrap_bases(x, z, &config.forward, config.seed, resamples)?;
    let replicates = bases.len() as f64;

    // one LASSO of z per replicate basis, then average into the pooled basis
    let per_replicate: Vec<(BasisCollection, Vec<f64>)> = bases
        .into_par_iter()
        .enumerate()
        .map(|(b, fns)| -> Result<(BasisCollection, Vec<f64>)> {
            let mut own = BasisCollection::new();
            for f in fns {
                own.insert(f, b);
            }
            let columns = basis_columns(&own, x);
            let design = GroupedDesign::singletons(columns, &[0], config.standardize)?;
            let cv = fit_path_cv(&design, &zs, &t, &config.lasso, derive_path(config.seed, &[4, b as u64]))?;
            let w = cv.solution.beta.iter().map(|g| g[0]).collect();
            Ok((own, w))
        })
        .collect::<Result<_>>()?;

    let mut basis = BasisCollection::new();
    let mut weights = vec![0.0];
    for (b, (own, w)) in per_replicate.iter().enumerate() {
        for (f, wk) in own.functions().iter().zip(w) {
            if basis.insert(f.clone(), b) {
                weights.push(0.0);
            }
            let pos = basis.position(f).expect("just inserted");
            weights[pos] += wk / replicates;
        }
    }
    let generated = basis.len();

    let mut diagnostics = FitDiagnostics {
        generated,
        ..FitDiagnostics::default()
    };
    if config.variant == Variant::Prop1 {
        let columns = basis_columns(&basis, x);
        let folds = config.lasso.folds.min(data.n());
        let fold_of = stratified_folds(&t, folds, derive_seed(config.seed, 5));
        let alpha = ridge::cross_validate(&columns, &zs, &fold_of, folds, &ridge::alpha_grid(data.n()));
        weights = ridge::fit(&columns, &zs, alpha);
        diagnostics.lambda = Some(alpha);
    }
    diagnostics.active_groups = weights[1..].iter().filter(|w| **w != 0.0).count();
    Ok(FittedScbm {
        variant: config.variant,
        n_features: data.p(),
        basis,
        coefficients: Coefficients::Single { weights },
        propensity,
        column_scale: Vec::new(),
        config: config.clone(),
        diagnostics,
    })
}
