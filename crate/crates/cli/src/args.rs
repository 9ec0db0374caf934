use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scbm::propensity::PropensityConfig;
use scbm::EstimatorKind;

#[derive(Debug, Parser)]
#[command(name = "scbm", version, about = "Heterogeneous treatment effects with shrinkage causal bagging MARS")]
pub struct Cli {
    /// Worker threads (defaults to $SCBM_THREADS, then every core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON run configuration; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// More log output on standard error (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a CSV dataset and write a model archive.
    Fit(FitArgs),
    /// Predict per-row effects (or arm outcomes) for a CSV of covariates.
    Predict(PredictArgs),
    /// Draw a simulation scenario to CSV.
    Simulate(SimulateArgs),
    /// Run the simulation benchmark grid.
    Bench(BenchArgs),
    /// Removal-based variable importance of a fitted SCBM model.
    Importance(ImportanceArgs),
    /// Partial dependence of the effect estimate on one covariate.
    Pdp(PdpArgs),
    /// Sorted-subgroup calibration with repeated train/holdout splits.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Name of the 0/1 treatment column.
    #[arg(long)]
    pub treatment: Option<String>,
    /// Name of the outcome column.
    #[arg(long)]
    pub outcome: Option<String>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct FitFlags {
    #[arg(long, value_parser = parse_kind)]
    pub variant: Option<EstimatorKind>,
    /// Bootstrap replicates.
    #[arg(long)]
    pub b: Option<usize>,
    /// Maximum forward-pass terms per replicate.
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Maximum interaction degree.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub cv_folds: Option<usize>,
    /// rf, logistic or known:<value>.
    #[arg(long, value_parser = parse_propensity)]
    pub propensity: Option<PropensityConfig>,
    /// Propensity clipping for the transformed outcome.
    #[arg(long)]
    pub clip_eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: FitFlags,
    /// Output model archive (JSON).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArmArg {
    Treated,
    Control,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of covariates; treatment and outcome columns are ignored when present.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub treatment: Option<String>,
    #[arg(long)]
    pub outcome: Option<String>,
    /// Predict this arm's outcome instead of the effect.
    #[arg(long, value_enum)]
    pub arm: Option<ArmArg>,
    /// Output CSV (standard output when absent).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    Rct,
    Observational,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario 1-12.
    #[arg(long)]
    pub scenario: u8,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    /// Switch the scenario to its randomized or observational twin.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (standard output when absent).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the true effect and propensity of every row here.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated scenario ids.
    #[arg(long, value_delimiter = ',')]
    pub scenarios: Option<Vec<u8>>,
    /// Comma-separated NxP settings, e.g. 200x50,500x50.
    #[arg(long, value_delimiter = ',', value_parser = parse_setting)]
    pub settings: Option<Vec<scbm::simbench::Setting>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
    pub estimators: Option<Vec<EstimatorKind>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Give the estimators the true propensity.
    #[arg(long)]
    pub oracle_propensity: bool,
    /// Record fit wall time (reports are then run-dependent).
    #[arg(long)]
    pub wall_time: bool,
    /// Directory for bench.csv, bench_long.csv and bench.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    ZeroGroups,
    Refit,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Hte,
    Treated,
    Control,
}

#[derive(Debug, Args)]
pub struct PdpArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Covariate name or zero-based index.
    #[arg(long)]
    pub variable: String,
    /// Number of quantile grid points.
    #[arg(long, conflicts_with = "grid")]
    pub points: Option<usize>,
    /// Explicit comma-separated grid values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "hte")]
    pub target: TargetArg,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: FitFlags,
    /// Number of subgroups.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Share of rows held out per replication.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Weight subgroup ATEs by inverse propensity.
    #[arg(long)]
    pub iptw: bool,
    /// Output JSON report (standard output when absent).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the per-subgroup summary CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: scbm::Error| e.to_string())
}

fn parse_propensity(s: &str) -> Result<PropensityConfig, String> {
    s.parse().map_err(|e: scbm::Error| e.to_string())
}

fn parse_setting(s: &str) -> Result<scbm::simbench::Setting, String> {
    let (n, p) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxP, got {s:?}"))?;
    let n = n.trim().parse().map_err(|_| format!("bad n in {s:?}"))?;
    let p = p.trim().parse().map_err(|_| format!("bad p in {s:?}"))?;
    Ok(scbm::simbench::Setting { n, p })
}
