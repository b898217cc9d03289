//! Command-line interface.
//!
//! Exit codes: 0 success, 1 data or domain error, 2 usage error.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gasdemand_core::backtest::{self, BacktestPlan, BacktestReport, ReportRow, TaskFailure};
use gasdemand_core::errorprop::{self, ErrorPropParams};
use gasdemand_core::{Dataset, HolidayCalendar, ModelKind, TemperatureSource};

use crate::config::{self, RunConfig};
use crate::csvio::{self, FeatureDump};
use crate::persist;
use crate::report::{self, ReportWriter};

/// Default output directory when neither `--out-dir` nor the environment sets one.
pub const DEFAULT_OUT_DIR: &str = "gasdemand-out";

/// Day-ahead residential gas demand forecasting.
#[derive(Debug, Parser)]
#[command(name = "gasdemand", version, about, propagate_version = true)]
pub struct Cli {
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset from a generator config.
    Generate(GenerateArgs),
    /// Tune, fit and evaluate models on expanding train/test splits.
    Backtest(BacktestArgs),
    /// Estimate temperature-error propagation parameters from a dataset.
    Errorprop(ErrorpropArgs),
}

/// `generate` flags.
#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generator config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Temperature sessions to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sessions {
    /// Recorded temperatures.
    Actual,
    /// Forecast temperatures.
    Forecast,
    /// Both, plus the propagation comparison.
    Both,
}

impl Sessions {
    fn sources(self) -> Vec<TemperatureSource> {
        match self {
            Sessions::Actual => vec![TemperatureSource::Actual],
            Sessions::Forecast => vec![TemperatureSource::Forecast],
            Sessions::Both => vec![TemperatureSource::Actual, TemperatureSource::Forecast],
        }
    }
}

/// `backtest` flags.
#[derive(Debug, Args)]
pub struct BacktestArgs {
    /// Input CSV (`date,rgd,temp_forecast,temp_actual`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated models: ridge, gp, knn, mlp, torus.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<ModelKind>>,
    /// Comma-separated test years.
    #[arg(long, value_delimiter = ',')]
    pub test_years: Option<Vec<i32>>,
    /// Temperature column(s) to use.
    #[arg(long, value_enum)]
    pub temperature: Option<Sessions>,
    /// Run config (TOML) with defaults and tuning grids.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "GASDEMAND_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Also write the raw feature rows of every split to this directory.
    #[arg(long)]
    pub dump_features: Option<PathBuf>,
    /// Also save every fitted model as JSON to this directory.
    #[arg(long)]
    pub save_models: Option<PathBuf>,
    /// MLP seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test days per task re-forecast from truncated data.
    #[arg(long, default_value_t = 3)]
    pub audit_days: usize,
    /// Omit the timestamp comment line from report CSVs.
    #[arg(long)]
    pub no_timestamp: bool,
}

/// `errorprop` flags.
#[derive(Debug, Args)]
pub struct ErrorpropArgs {
    /// Input CSV with both temperature columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Temperature-free forecast MSE σ₀², MSCM².
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Emit the RMSE curve over σ²ε as `min:max:steps`.
    #[arg(long, value_parser = parse_curve)]
    pub curve: Option<CurveRange>,
    /// Re-plot an `rmse_comparison.csv` written by `backtest`.
    #[arg(long)]
    pub comparison: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "GASDEMAND_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Omit the timestamp comment line from report CSVs.
    #[arg(long)]
    pub no_timestamp: bool,
}

/// σ²ε range of the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRange {
    /// Smallest σ²ε.
    pub min: f64,
    /// Largest σ²ε.
    pub max: f64,
    /// Number of points.
    pub steps: usize,
}

fn parse_curve(s: &str) -> Result<CurveRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected min:max:steps".into());
    };
    let min: f64 = a.parse().map_err(|_| format!("bad min `{a}`"))?;
    let max: f64 = b.parse().map_err(|_| format!("bad max `{b}`"))?;
    let steps: usize = n.parse().map_err(|_| format!("bad steps `{n}`"))?;
    if !(min >= 0.0 && max >= min && max.is_finite() && steps >= 1) {
        return Err("need 0 <= min <= max and steps >= 1".into());
    }
    Ok(CurveRange { min, max, steps })
}

/// Run a parsed command.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Backtest(a) => run_backtest(a),
        Command::Errorprop(a) => errorprop_cmd(a),
    }
}

fn read_dataset(path: &Path) -> anyhow::Result<Dataset> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    csvio::read_dataset(BufReader::new(file)).with_context(|| format!("cannot read {}", path.display()))
}

fn generate(a: GenerateArgs) -> anyhow::Result<()> {
    let mut cfg = config::load_generator(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let records = gasdemand_core::datagen::generate(&cfg)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let out = File::create(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    csvio::write_records(BufWriter::new(out), &records, &[])?;
    println!("wrote {} days to {}", records.len(), a.out.display());
    Ok(())
}

fn out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or(config).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn execute(plan: &BacktestPlan, dataset: &Dataset, calendar: &HolidayCalendar) -> BacktestReport {
    let tasks = plan.tasks();
    let one = |t: &backtest::Task| -> Result<ReportRow, TaskFailure> {
        let start = Instant::now();
        let r = backtest::evaluate_task(t, dataset, calendar, &plan.grids, plan.audit_days);
        if let Ok(row) = &r {
            log::info!(
                "{} {} {}: rmse {:.4} [{}] in {:.1}s",
                row.model,
                row.year,
                row.source.as_str(),
                row.scores.rmse,
                row.hyperparams,
                start.elapsed().as_secs_f64()
            );
        }
        r
    };
    #[cfg(feature = "parallel")]
    let results = {
        use rayon::prelude::*;
        tasks.par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results = tasks.iter().map(one).collect();
    backtest::assemble(plan, dataset, results)
}

fn run_backtest(a: BacktestArgs) -> anyhow::Result<()> {
    let rc = match &a.config {
        Some(p) => config::load_run(p)?,
        None => RunConfig::default(),
    };
    let Some(data) = a.data.clone().or(rc.data.clone()) else {
        bail!(UsageError("--data is required (or `data` in --config)".into()));
    };
    let models = match (a.models.clone(), &rc.models) {
        (Some(m), _) => m,
        (None, Some(names)) => names
            .iter()
            .map(|n| n.parse::<ModelKind>())
            .collect::<Result<_, _>>()
            .map_err(|e| UsageError(e.to_string()))?,
        (None, None) => ModelKind::ALL.to_vec(),
    };
    let sessions = match (a.temperature, &rc.temperature) {
        (Some(s), _) => s,
        (None, Some(s)) => Sessions::from_str(s, true).map_err(|_| UsageError(format!("unknown temperature `{s}`")))?,
        (None, None) => Sessions::Both,
    };
    let dataset = read_dataset(&data)?;
    let test_years = match a.test_years.clone().or(rc.test_years.clone()) {
        Some(y) => y,
        None => default_test_years(&dataset),
    };
    let mut grids = rc.grids.clone();
    if let Some(seed) = a.seed.or(rc.seed) {
        grids.mlp.seed = seed;
    }
    let mut plan = BacktestPlan::new(&dataset, &test_years, &models, &sessions.sources(), grids)?;
    plan.audit_days = a.audit_days;
    let calendar = HolidayCalendar::italy();

    if let Some(dir) = &a.dump_features {
        dump_features(dir, &plan, &dataset, &calendar)?;
    }

    let start = Instant::now();
    let report = execute(&plan, &dataset, &calendar);
    for f in &report.failures {
        log::warn!("skipped: {f}");
        eprintln!("warning: {f}");
    }
    for (model, year, e) in &report.comparison_errors {
        eprintln!("warning: no propagation comparison for {model} {year:?}: {e}");
    }
    if !report.audits_passed() {
        bail!("look-ahead audit failed: a forecast changed when later data was removed");
    }
    if report.rows.is_empty() {
        bail!("every model failed");
    }

    let dir = out_dir(a.out_dir.clone(), rc.out_dir.clone());
    let stamp = (!a.no_timestamp).then(report::timestamp);
    let mut writer = ReportWriter::new(&dir, stamp)?;
    writer.backtest(&plan, &report)?;
    if let Some(models_dir) = &a.save_models {
        std::fs::create_dir_all(models_dir)?;
        for row in &report.rows {
            let path = models_dir.join(format!("{}_{}_{}.json", row.model, row.source.as_str(), row.year));
            persist::save(BufWriter::new(File::create(&path)?), &row.forecaster)?;
        }
    }

    print_summary(&plan, &report);
    println!(
        "{} rows, {} failures, {:.1}s; {} files in {}",
        report.rows.len(),
        report.failures.len(),
        start.elapsed().as_secs_f64(),
        writer.written().len(),
        dir.display()
    );
    Ok(())
}

fn default_test_years(dataset: &Dataset) -> Vec<i32> {
    let Some(last) = dataset.last_date() else { return Vec::new() };
    let full = if last.month() == 12 && last.day() == 31 { last.year() } else { last.year() - 1 };
    (full - 2..=full).collect()
}

fn dump_features(dir: &Path, plan: &BacktestPlan, dataset: &Dataset, calendar: &HolidayCalendar) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    for &source in &plan.sessions {
        for split in &plan.splits {
            let parts = [("train", split.train_from, split.train_to), ("test", split.test_from, split.test_to)];
            for (name, from, to) in parts {
                let dump = FeatureDump::build(dataset, from, to, source, calendar)?;
                let path = dir.join(format!("features_{}_{}_{name}.csv", source.as_str(), split.year));
                csvio::write_features(BufWriter::new(File::create(&path)?), &dump)?;
            }
        }
    }
    Ok(())
}

fn print_summary(plan: &BacktestPlan, report: &BacktestReport) {
    for &source in &plan.sessions {
        println!("{} temperature:", source.as_str());
        for &model in &plan.models {
            if let Some(e) = report.evaluation(model, source) {
                let yearly: Vec<String> = e.yearly.iter().map(|(y, s)| format!("{y} {:.3}", s.rmse)).collect();
                println!("  {:<6} rmse {:.3} mae {:.3} ({})", model.as_str(), e.aggregate.rmse, e.aggregate.mae, yearly.join(", "));
            }
        }
    }
    for c in report.comparisons.iter().filter(|c| c.year.is_none()) {
        println!(
            "  {:<6} predicted forecast-temperature rmse {:.3}, measured {:.3}",
            c.model.as_str(),
            c.predicted_rmse,
            c.forecast_rmse
        );
    }
}

fn errorprop_cmd(a: ErrorpropArgs) -> anyhow::Result<()> {
    let dataset = read_dataset(&a.data)?;
    let sigma2_0 = a.sigma0.unwrap_or(0.0);
    if !(sigma2_0 >= 0.0) {
        bail!(UsageError("--sigma0 must be >= 0".into()));
    }
    let params: ErrorPropParams = errorprop::estimate_params(dataset.records(), sigma2_0)?;
    println!("alpha             {:.6} MSCM/°C", params.alpha);
    println!("p_cold            {:.6}", params.p_cold);
    println!("sigma2_eps        {:.6} °C²", params.sigma2_eps);
    println!("performance_limit {:.6} MSCM", params.performance_limit());
    if a.sigma0.is_some() {
        println!("sigma2_0          {sigma2_0:.6} MSCM²");
        println!("predicted_rmse    {:.6} MSCM", params.predicted_rmse());
        match params.negligibility_threshold() {
            Ok(t) => println!("threshold         {t:.6} °C²"),
            Err(e) => println!("threshold         undefined ({e})"),
        }
    }
    if a.curve.is_some() || a.comparison.is_some() {
        let dir = out_dir(a.out_dir.clone(), None);
        let stamp = (!a.no_timestamp).then(report::timestamp);
        let mut writer = ReportWriter::new(&dir, stamp)?;
        if let Some(c) = a.curve {
            let points = errorprop::rmse_curve(sigma2_0, &params, c.min, c.max, c.steps)?;
            writer.curve(sigma2_0, &points)?;
        }
        if let Some(p) = &a.comparison {
            writer.replot_comparison(p)?;
        }
        for p in writer.written() {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

/// An argument problem found after clap parsing; exits with code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Map an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        2
    } else {
        1
    }
}
