//! MARS-family comparators: causal MARS and stratified bagged causal MARS.

mod bcm;
mod causal;

pub use bcm::{
    bcm_resamples, fit_bcm, fit_bcm_on_resamples, strata_edges, stratum_of, BcmReplicate,
    StratifiedBcmFit, DEFAULT_STRATA,
};
pub use causal::{fit_causal_mars, CausalMarsFit};
