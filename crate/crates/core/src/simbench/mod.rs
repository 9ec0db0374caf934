//! Simulation scenarios, the benchmark runner and its metrics.

mod bench;
mod scenario;

pub use bench::{
    median, run_bench, Aggregate, BenchConfig, BenchMetadata, BenchReport, BenchRow, Setting,
    DEFAULT_TEST_POINTS,
};
pub use scenario::{
    abs_bias, draw_covariates, draw_response, draw_scenario, f1, f2, mse, Regime, Scenario, SimDraw,
    MIN_FEATURES,
};
