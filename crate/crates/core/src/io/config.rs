use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interpret::{CalibrationConfig, ImportanceMode, DEFAULT_GRID_POINTS};
use crate::model::{EstimatorKind, EstimatorSettings};
use crate::simbench::BenchConfig;

pub const ENV_THREADS: &str = "SCBM_THREADS";
pub const ENV_OUTPUT_DIR: &str = "SCBM_OUTPUT_DIR";

/// Every tunable of a run, as read from a JSON file. Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub estimator: EstimatorKind,
    pub settings: EstimatorSettings,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub treatment_column: String,
    pub outcome_column: String,
    pub bench: BenchConfig,
    pub calibration: CalibrationConfig,
    pub importance: ImportanceMode,
    pub pdp_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorKind::Scbm,
            settings: EstimatorSettings::default(),
            seed: 0,
            threads: None,
            output_dir: PathBuf::from("."),
            treatment_column: "t".into(),
            outcome_column: "y".into(),
            bench: BenchConfig::default(),
            calibration: CalibrationConfig::default(),
            importance: ImportanceMode::ZeroGroups,
            pdp_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::config(path.as_ref().display().to_string(), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `SCBM_THREADS` and `SCBM_OUTPUT_DIR` when set.
    pub fn apply_env(&mut self) -> Result<()> {
        self.apply_overrides(std::env::var(ENV_THREADS).ok(), std::env::var_os(ENV_OUTPUT_DIR).map(PathBuf::from))
    }

    pub(crate) fn apply_overrides(&mut self, threads: Option<String>, output_dir: Option<PathBuf>) -> Result<()> {
        if let Some(v) = threads {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::config(ENV_THREADS, format!("expected a positive integer, got {v:?}")))?;
            self.threads = Some(n);
        }
        if let Some(dir) = output_dir {
            self.output_dir = dir;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        self.bench.validate()?;
        self.calibration.validate()?;
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be >= 1"));
        }
        if self.pdp_points < 1 {
            return Err(Error::config("pdp_points", "must be >= 1"));
        }
        if self.treatment_column == self.outcome_column {
            return Err(Error::config("outcome_column", "must differ from treatment_column"));
        }
        Ok(())
    }
}
