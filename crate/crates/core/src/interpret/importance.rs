use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::group_lasso::{solve, GroupedDesign};
use crate::shrinkage::{basis_columns, Coefficients, FittedScbm};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMode {
    /// Drop the basis functions that use the variable and keep every other coefficient.
    #[default]
    ZeroGroups,
    /// Refit the group LASSO at the fitted lambda without those basis functions.
    Refit,
}

impl fmt::Display for ImportanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImportanceMode::ZeroGroups => "zero-groups",
            ImportanceMode::Refit => "refit",
        })
    }
}

impl FromStr for ImportanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-groups" | "zero_groups" => Ok(ImportanceMode::ZeroGroups),
            "refit" => Ok(ImportanceMode::Refit),
            other => Err(Error::config("mode", format!("unknown importance mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableImportance {
    pub variable: usize,
    pub name: String,
    /// Increase in squared-error loss when the variable is removed.
    pub raw: f64,
    /// Raw importance as a percentage of the largest one, floored at 0.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub mode: ImportanceMode,
    pub baseline_loss: f64,
    pub variables: Vec<VariableImportance>,
}

impl ImportanceReport {
    /// Variable indices ordered by decreasing raw importance.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<&VariableImportance> = self.variables.iter().collect();
        order.sort_by(|a, b| b.raw.total_cmp(&a.raw).then(a.variable.cmp(&b.variable)));
        order.into_iter().map(|v| v.variable).collect()
    }
}

/// Squared-error loss of the outcome model, each row scored at its own arm.
fn loss(columns: &[Vec<f64>], treated: &[f64], control: &[f64], keep: &[bool], data: &Dataset) -> f64 {
    let t = data.treatment();
    data.outcome()
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let coef = if t[i] == 1 { treated } else { control };
            let fit: f64 = columns
                .iter()
                .zip(coef)
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|((c, b), _)| b * c[i])
                .sum();
            (y - fit).powi(2)
        })
        .sum()
}

/// Scales raw importances so the largest is 100.
pub(crate) fn normalize(raw: &[f64]) -> Vec<f64> {
    let top = raw.iter().copied().fold(0.0, f64::max);
    if top > 0.0 {
        raw.iter().map(|r| 100.0 * r.max(0.0) / top).collect()
    } else {
        vec![0.0; raw.len()]
    }
}

/// Removal-based importance of every covariate.
pub fn variable_importance(model: &FittedScbm, data: &Dataset, mode: ImportanceMode) -> Result<ImportanceReport> {
    let Coefficients::PerArm { treated, control } = &model.coefficients else {
        return Err(Error::Unsupported(format!(
            "variable importance needs per-arm coefficients; {} models have a single weight vector",
            model.variant.name()
        )));
    };
    if data.p() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: data.p(),
        });
    }
    let columns = basis_columns(&model.basis, data.covariates());
    let all = vec![true; columns.len()];
    let baseline = loss(&columns, treated, control, &all, data);
    let functions = model.basis.functions();
    let t: Vec<u8> = data.treatment().to_vec();
    let y: Vec<f64> = data.outcome().to_vec();

    let mut raw = Vec::with_capacity(data.p());
    for j in 0..data.p() {
        let drop: Vec<bool> = functions.iter().map(|f| f.uses_variable(j)).collect();
        if !drop.iter().any(|d| *d) {
            raw.push(0.0);
            continue;
        }
        let keep: Vec<bool> = drop.iter().map(|d| !d).collect();
        let without = match mode {
            ImportanceMode::ZeroGroups => loss(&columns, treated, control, &keep, data),
            ImportanceMode::Refit => {
                let lambda = model
                    .diagnostics
                    .lambda
                    .ok_or_else(|| Error::Unsupported("model has no fitted lambda to refit at".into()))?;
                let design = GroupedDesign::treatment_blocks(&columns, &t, &[0], model.config.standardize)?
                    .without_groups(&drop);
                let sol = solve(&design, &y, lambda, model.config.lasso.tol, model.config.lasso.max_iter)?;
                let kept: Vec<Vec<f64>> = columns
                    .iter()
                    .zip(&keep)
                    .filter_map(|(c, k)| k.then(|| c.clone()))
                    .collect();
                let (bt, bc): (Vec<f64>, Vec<f64>) = sol.beta.iter().map(|b| (b[0], b[1])).unzip();
                loss(&kept, &bt, &bc, &vec![true; kept.len()], data)
            }
        };
        raw.push(without - baseline);
    }
    let normalized = normalize(&raw);
    Ok(ImportanceReport {
        mode,
        baseline_loss: baseline,
        variables: raw
            .into_iter()
            .zip(normalized)
            .enumerate()
            .map(|(j, (raw, normalized))| VariableImportance {
                variable: j,
                name: data.feature_name(j),
                raw,
                normalized,
            })
            .collect(),
    })
}
