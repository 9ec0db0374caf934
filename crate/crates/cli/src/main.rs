mod args;

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use scbm::interpret::{
    partial_dependence, subgroup_calibration, variable_importance, AteWeighting, Grid, ImportanceMode, PdTarget,
};
use scbm::io::{load_covariates, load_csv, load_model, save_model, write_dataset_csv_to, RunConfig};
use scbm::simbench::{draw_scenario, run_bench, Regime, Scenario};
use scbm::{fit_estimator, Arm, Dataset, FittedModel, HteModel};

use args::{ArmArg, Cli, Command, DataArgs, FitFlags, ModeArg, RegimeArg, TargetArg};

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> AnyResult<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Fit(a) => fit(cfg, a),
        Command::Predict(a) => predict(cfg, a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(cfg, a),
        Command::Importance(a) => importance(cfg, a),
        Command::Pdp(a) => pdp(cfg, a),
        Command::Calibrate(a) => calibrate(cfg, a),
    }
}

/// File when given, standard output otherwise.
fn sink(path: Option<&Path>) -> AnyResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn apply_fit_flags(cfg: &mut RunConfig, f: &FitFlags) -> AnyResult<()> {
    if let Some(v) = f.variant {
        cfg.estimator = v;
    }
    if let Some(b) = f.b {
        cfg.settings.scbm.b = b;
        cfg.settings.bcm_replicates = b;
    }
    if let Some(m) = f.m_max {
        cfg.settings.scbm.forward.m_max = m;
    }
    if let Some(k) = f.k_max {
        cfg.settings.scbm.forward.k_max = k;
    }
    if let Some(k) = f.cv_folds {
        cfg.settings.scbm.lasso.folds = k;
    }
    if let Some(p) = &f.propensity {
        cfg.settings.scbm.propensity = p.clone();
    }
    if let Some(e) = f.clip_eps {
        cfg.settings.scbm.clip_epsilon = e;
    }
    if let Some(s) = f.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(())
}

fn load_data(cfg: &mut RunConfig, d: &DataArgs) -> AnyResult<Dataset> {
    if let Some(t) = &d.treatment {
        cfg.treatment_column = t.clone();
    }
    if let Some(y) = &d.outcome {
        cfg.outcome_column = y.clone();
    }
    Ok(load_csv(&d.data, &cfg.treatment_column, &cfg.outcome_column)?)
}

fn fit(mut cfg: RunConfig, a: args::FitArgs) -> AnyResult<()> {
    apply_fit_flags(&mut cfg, &a.fit)?;
    let data = load_data(&mut cfg, &a.data)?;
    log::info!("fitting {} on {} rows, {} covariates", cfg.estimator, data.n(), data.p());
    let model = fit_estimator(cfg.estimator, &data, &cfg.settings, cfg.seed)?;
    if let FittedModel::Scbm(m) = &model {
        log::info!(
            "{} basis functions, {} active groups",
            m.basis.len(),
            m.diagnostics.active_groups
        );
    }
    save_model(&a.out, &model)?;
    Ok(())
}

fn predict(cfg: RunConfig, a: args::PredictArgs) -> AnyResult<()> {
    let model = load_model(&a.model)?.model;
    let t = a.treatment.unwrap_or(cfg.treatment_column);
    let y = a.outcome.unwrap_or(cfg.outcome_column);
    let (x, _) = load_covariates(&a.data, &[t.as_str(), y.as_str()])?;
    let (header, values) = match a.arm {
        None => ("tau_hat", model.predict_hte_all(&x)?),
        Some(ArmArg::Treated) => ("y_hat_treated", model.predict_outcome_all(&x, Arm::Treated)?),
        Some(ArmArg::Control) => ("y_hat_control", model.predict_outcome_all(&x, Arm::Control)?),
    };
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record([header])?;
    for v in values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn simulate(a: args::SimulateArgs) -> AnyResult<()> {
    let mut scenario = Scenario::new(a.scenario)?;
    if let Some(r) = a.regime {
        scenario = scenario.with_regime(match r {
            RegimeArg::Rct => Regime::Rct,
            RegimeArg::Observational => Regime::Observational,
        });
    }
    let draw = draw_scenario(scenario, a.n, a.p, 1, a.seed)?;
    write_dataset_csv_to(sink(a.out.as_deref())?, &draw.train, "t", "y")?;
    if let Some(path) = &a.truth {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["tau", "propensity"])?;
        for (tau, e) in draw.true_tau_train.iter().zip(&draw.true_propensity_train) {
            w.write_record([tau.to_string(), e.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn bench(cfg: RunConfig, a: args::BenchArgs) -> AnyResult<()> {
    let mut bc = cfg.bench.clone();
    bc.estimator = cfg.settings.clone();
    if let Some(s) = a.scenarios {
        bc.scenarios = s;
    }
    if let Some(s) = a.settings {
        bc.settings = s;
    }
    if let Some(e) = a.estimators {
        bc.estimators = e;
    }
    if let Some(r) = a.reps {
        bc.replications = r;
    }
    if let Some(n) = a.n_test {
        bc.n_test = n;
    }
    if let Some(s) = a.seed {
        bc.seed = s;
    }
    bc.oracle_propensity |= a.oracle_propensity;
    bc.record_wall_time |= a.wall_time;
    let dir = a.out_dir.unwrap_or(cfg.output_dir);
    fs::create_dir_all(&dir)?;
    let report = run_bench(&bc)?;
    report.write_csv(File::create(dir.join("bench.csv"))?)?;
    report.write_long_csv(File::create(dir.join("bench_long.csv"))?)?;
    report.write_json(File::create(dir.join("bench.json"))?)?;
    let failures = report.rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{} rows written to {}{}",
        report.rows.len(),
        dir.display(),
        if failures > 0 { format!(" ({failures} failed fits)") } else { String::new() }
    );
    for agg in report.aggregates.iter().filter(|a| a.metric == "mse") {
        if let Some(m) = agg.median {
            eprintln!("scenario {:>2} {} {:<6} median mse {m:.4}", agg.scenario, agg.setting, agg.estimator);
        }
    }
    Ok(())
}

fn importance(mut cfg: RunConfig, a: args::ImportanceArgs) -> AnyResult<()> {
    let FittedModel::Scbm(model) = load_model(&a.model)?.model else {
        return Err("variable importance needs an scbm model".into());
    };
    let data = load_data(&mut cfg, &a.data)?;
    let mode = match a.mode {
        Some(ModeArg::ZeroGroups) => ImportanceMode::ZeroGroups,
        Some(ModeArg::Refit) => ImportanceMode::Refit,
        None => cfg.importance,
    };
    let report = variable_importance(&model, &data, mode)?;
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record(["variable", "name", "raw", "normalized"])?;
    for v in &report.variables {
        w.write_record([v.variable.to_string(), v.name.clone(), v.raw.to_string(), v.normalized.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn pdp(mut cfg: RunConfig, a: args::PdpArgs) -> AnyResult<()> {
    let model = load_model(&a.model)?.model;
    let data = load_data(&mut cfg, &a.data)?;
    let j = match a.variable.parse::<usize>() {
        Ok(j) => j,
        Err(_) => (0..data.p())
            .find(|&j| data.feature_name(j) == a.variable)
            .ok_or_else(|| format!("no covariate named {:?}", a.variable))?,
    };
    let grid = match a.grid {
        Some(v) => Grid::Explicit(v),
        None => Grid::Quantiles(a.points.unwrap_or(cfg.pdp_points)),
    };
    let target = match a.target {
        TargetArg::Hte => PdTarget::Hte,
        TargetArg::Treated => PdTarget::Outcome(Arm::Treated),
        TargetArg::Control => PdTarget::Outcome(Arm::Control),
    };
    let curve = partial_dependence(&model, &data, j, &grid, target)?;
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record(["variable", "name", "grid", "value"])?;
    for (c, v) in curve.grid.iter().zip(&curve.values) {
        w.write_record([j.to_string(), curve.name.clone(), c.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn calibrate(mut cfg: RunConfig, a: args::CalibrateArgs) -> AnyResult<()> {
    apply_fit_flags(&mut cfg, &a.fit)?;
    let data = load_data(&mut cfg, &a.data)?;
    let mut cc = cfg.calibration.clone();
    if let Some(k) = a.k {
        cc.k = k;
    }
    if let Some(r) = a.reps {
        cc.replications = r;
    }
    if let Some(h) = a.holdout {
        cc.holdout = h;
    }
    if a.iptw {
        cc.weighting = AteWeighting::Iptw {
            propensity: cfg.settings.scbm.propensity.clone(),
            clip: cfg.settings.scbm.clip_epsilon,
        };
    }
    cc.seed = cfg.seed;
    let kind = cfg.estimator;
    let settings = cfg.settings.clone();
    let report = subgroup_calibration(&data, &cc, |d, seed| fit_estimator(kind, d, &settings, seed))?;
    let mut out = sink(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["subgroup", "mean_tau_hat", "mean_ate"])?;
        for (g, (m, ate)) in report.mean_tau_hat.iter().zip(&report.mean_ate).enumerate() {
            w.write_record([(g + 1).to_string(), m.to_string(), ate.map(|v| v.to_string()).unwrap_or_default()])?;
        }
        w.flush()?;
    }
    if let Some(rho) = report.spearman {
        eprintln!("spearman(mean tau_hat, ATE) = {rho:.3}");
    }
    Ok(())
}
