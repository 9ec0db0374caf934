pub mod baselines;
pub mod basis;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod forward;
pub mod group_lasso;
pub mod interpret;
pub mod io;
mod linalg;
pub mod model;
pub mod propensity;
pub mod rng;
pub mod shrinkage;
pub mod simbench;
mod scan;

pub use basis::{BasisCollection, BasisFunction, HingeTerm, Sign};
pub use dataset::{Arm, Dataset};
pub use error::{Error, Result};
pub use estimator::HteModel;
pub use shrinkage::{fit_scbm, FittedScbm, ScbmConfig, Variant};
pub use model::{fit_estimator, EstimatorKind, EstimatorSettings, FittedModel};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/getting-started.md")]
    mod getting_started {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/interpretation.md")]
    mod interpretation {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
