//! Post-fit interpretation: variable importance, partial dependence and
//! sorted-subgroup calibration.

mod calibration;
mod dependence;
mod importance;

pub use calibration::{
    spearman, subgroup_calibration, AteWeighting, CalibrationConfig, CalibrationReplicate,
    CalibrationReport, SubgroupStats,
};
pub use dependence::{
    partial_dependence, quantile_grid, Grid, PartialDependenceCurve, PdTarget, DEFAULT_GRID_POINTS,
};
pub use importance::{variable_importance, ImportanceMode, ImportanceReport, VariableImportance};
