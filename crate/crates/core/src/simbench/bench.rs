//! Benchmark grid runner and report writers.

use std::io::Write;
use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{abs_bias, draw_scenario, mse, Scenario, SimDraw};
use crate::baselines::{bcm_resamples, fit_bcm_on_resamples};
use crate::error::{Error, Result};
use crate::estimator::HteModel;
use crate::model::{fit_estimator, EstimatorKind, EstimatorSettings};
use crate::rng::{derive_path, derive_seed};
use crate::shrinkage::fit_scbm_with_scores;

pub const DEFAULT_TEST_POINTS: usize = 1000;
const METRIC_TARGET: &str = "true tau(x) on independently drawn test covariates";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting {
    pub n: usize,
    pub p: usize,
}

impl Setting {
    pub fn label(&self) -> String {
        format!("n{}_p{}", self.n, self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub scenarios: Vec<u8>,
    pub settings: Vec<Setting>,
    pub estimators: Vec<EstimatorKind>,
    pub replications: usize,
    pub n_test: usize,
    pub seed: u64,
    /// Use the true propensity instead of an estimated one.
    pub oracle_propensity: bool,
    /// Measure fit time per cell (makes reports run-dependent).
    pub record_wall_time: bool,
    pub estimator: EstimatorSettings,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scenarios: (1..=12).collect(),
            settings: vec![Setting { n: 200, p: 50 }],
            estimators: vec![EstimatorKind::Scbm, EstimatorKind::Cm, EstimatorKind::Bcm],
            replications: 20,
            n_test: DEFAULT_TEST_POINTS,
            seed: 0,
            oracle_propensity: false,
            record_wall_time: false,
            estimator: EstimatorSettings::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        for &s in &self.scenarios {
            Scenario::new(s)?;
        }
        if self.scenarios.is_empty() || self.settings.is_empty() || self.estimators.is_empty() {
            return Err(Error::config("bench", "scenarios, settings and estimators must be non-empty"));
        }
        for s in &self.settings {
            if s.p < super::scenario::MIN_FEATURES || s.n < 2 {
                return Err(Error::config(
                    "settings",
                    format!("setting {} needs n >= 2 and p >= 9", s.label()),
                ));
            }
        }
        if self.replications < 1 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        if self.n_test < 1 {
            return Err(Error::config("n_test", "must be >= 1"));
        }
        self.estimator.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: u8,
    pub n: usize,
    pub p: usize,
    pub estimator: EstimatorKind,
    pub replication: usize,
    pub seed: u64,
    pub mse: Option<f64>,
    pub abs_bias: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scenario: u8,
    pub setting: String,
    pub estimator: EstimatorKind,
    pub metric: String,
    pub count: usize,
    pub failures: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMetadata {
    pub version: String,
    pub metric_target: String,
    pub propensity: String,
    pub config: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metadata: BenchMetadata,
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Linear-interpolation quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median of the values, `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(quantile(&v, 0.5))
}

/// Test-set effect estimates for one estimator on one draw.
fn estimate(kind: EstimatorKind, draw: &SimDraw, config: &BenchConfig, seed: u64) -> Result<Array1<f64>> {
    let test = &draw.test_covariates;
    if !config.oracle_propensity {
        let model = fit_estimator(kind, &draw.train, &config.estimator, seed)?;
        return model.predict_hte_all(test);
    }
    let e = &draw.true_propensity_train;
    match kind {
        EstimatorKind::Scbm | EstimatorKind::Prop0 | EstimatorKind::Prop1 => {
            let cfg = config.estimator.scbm_for(kind, seed)?;
            fit_scbm_with_scores(&draw.train, &cfg, e, None)?.predict_hte_all(test)
        }
        EstimatorKind::Cm => fit_estimator(kind, &draw.train, &config.estimator, seed)?.predict_hte_all(test),
        EstimatorKind::Bcm => {
            let resamples = bcm_resamples(draw.train.n(), config.estimator.bcm_replicates, seed);
            let fit = fit_bcm_on_resamples(
                &draw.train,
                &config.estimator.scbm.forward,
                config.estimator.bcm_strata,
                e,
                None,
                &resamples,
                seed,
            )?;
            test.rows()
                .into_iter()
                .map(|r| fit.predict_hte_with_score(r, draw.scenario.propensity(&r.to_vec())))
                .collect()
        }
    }
}

/// Runs every (scenario, setting, replication, estimator) cell.
///
/// A failing fit is recorded in its row and the run continues. Each cell's draw
/// and fit seeds derive from `config.seed`, so the report does not depend on
/// the number of worker threads.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut cells = Vec::new();
    for &s in &config.scenarios {
        for (si, setting) in config.settings.iter().enumerate() {
            for r in 0..config.replications {
                cells.push((s, si, *setting, r));
            }
        }
    }
    let rows: Vec<Vec<BenchRow>> = cells
        .par_iter()
        .map(|&(s, si, setting, r)| {
            let cell_seed = derive_path(config.seed, &[u64::from(s), si as u64, r as u64]);
            let draw = draw_scenario(Scenario::new(s).expect("validated"), setting.n, setting.p, config.n_test, cell_seed);
            config
                .estimators
                .par_iter()
                .map(|&kind| {
                    let start = Instant::now();
                    let fit_seed = derive_seed(cell_seed, 1);
                    let outcome = draw.as_ref().map_err(|e| Error::Fit(e.to_string())).and_then(|d| {
                        let tau_hat = estimate(kind, d, config, fit_seed)?;
                        Ok((mse(&tau_hat, &d.true_tau_test)?, abs_bias(&tau_hat, &d.true_tau_test)?))
                    });
                    let elapsed = config.record_wall_time.then(|| start.elapsed().as_secs_f64());
                    let (m, b, error) = match outcome {
                        Ok((m, b)) => (Some(m), Some(b), None),
                        Err(e) => {
                            log::warn!("scenario {s} {} rep {r} {kind}: {e}", setting.label());
                            (None, None, Some(e.to_string()))
                        }
                    };
                    BenchRow {
                        scenario: s,
                        n: setting.n,
                        p: setting.p,
                        estimator: kind,
                        replication: r,
                        seed: cell_seed,
                        mse: m,
                        abs_bias: b,
                        wall_time_s: elapsed,
                        error,
                    }
                })
                .collect()
        })
        .collect();
    let rows: Vec<BenchRow> = rows.into_iter().flatten().collect();
    let aggregates = aggregate(&rows, config);
    Ok(BenchReport {
        metadata: BenchMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            metric_target: METRIC_TARGET.to_string(),
            propensity: if config.oracle_propensity { "true" } else { "estimated" }.to_string(),
            config: config.clone(),
        },
        rows,
        aggregates,
    })
}

fn aggregate(rows: &[BenchRow], config: &BenchConfig) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &s in &config.scenarios {
        for setting in &config.settings {
            for &kind in &config.estimators {
                let cell: Vec<&BenchRow> = rows
                    .iter()
                    .filter(|r| r.scenario == s && r.n == setting.n && r.p == setting.p && r.estimator == kind)
                    .collect();
                for (metric, pick) in [
                    ("mse", (|r: &BenchRow| r.mse) as fn(&BenchRow) -> Option<f64>),
                    ("abs_bias", |r: &BenchRow| r.abs_bias),
                ] {
                    let mut v: Vec<f64> = cell.iter().filter_map(|r| pick(r)).collect();
                    v.sort_by(f64::total_cmp);
                    let stat = |q: f64| (!v.is_empty()).then(|| quantile(&v, q));
                    out.push(Aggregate {
                        scenario: s,
                        setting: setting.label(),
                        estimator: kind,
                        metric: metric.to_string(),
                        count: v.len(),
                        failures: cell.len() - v.len(),
                        mean: (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64),
                        median: stat(0.5),
                        q1: stat(0.25),
                        q3: stat(0.75),
                    });
                }
            }
        }
    }
    out
}

impl BenchReport {
    /// Median of `metric` ("mse" or "abs_bias") for one cell.
    pub fn median(&self, scenario: u8, estimator: EstimatorKind, metric: &str) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.scenario == scenario && a.estimator == estimator && a.metric == metric)
            .and_then(|a| a.median)
    }

    /// One row per cell and replication.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let timed = self.metadata.config.record_wall_time;
        let mut header = vec!["scenario", "n", "p", "estimator", "replication", "seed", "mse", "abs_bias"];
        if timed {
            header.push("wall_time_s");
        }
        header.push("error");
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.scenario.to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.estimator.to_string(),
                r.replication.to_string(),
                r.seed.to_string(),
                opt(r.mse),
                opt(r.abs_bias),
            ];
            if timed {
                rec.push(opt(r.wall_time_s));
            }
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plot-ready long format: estimator, scenario, setting, metric, replication, value.
    pub fn write_long_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["estimator", "scenario", "setting", "metric", "replication", "value"])?;
        for r in &self.rows {
            let setting = Setting { n: r.n, p: r.p }.label();
            for (metric, v) in [("mse", r.mse), ("abs_bias", r.abs_bias)] {
                if let Some(v) = v {
                    w.write_record([
                        r.estimator.name(),
                        &r.scenario.to_string(),
                        &setting,
                        metric,
                        &r.replication.to_string(),
                        &v.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Metadata and aggregates as JSON.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Summary<'a> {
            metadata: &'a BenchMetadata,
            aggregates: &'a [Aggregate],
        }
        serde_json::to_writer_pretty(
            out,
            &Summary {
                metadata: &self.metadata,
                aggregates: &self.aggregates,
            },
        )?;
        Ok(())
    }
}
