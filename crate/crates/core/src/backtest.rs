//! Expanding-window backtest over test years, models and temperature sources.
//!
//! For test year `Y` the training window runs from the first record to
//! December 31 of `Y−1`. Every test day is forecast one day ahead: demand
//! lags come from realized history, the day's temperature from the session's
//! source. Work is split into independent [`Task`]s so callers can run them
//! in parallel and hand the results to [`assemble`].

use alloc::vec::Vec;

use crate::calendar::{CivilDate, HolidayCalendar};
use crate::errorprop::{self, ErrorPropError, ErrorPropParams};
use crate::features::{self, DailyRecord, Dataset, FeatureError, TemperatureSource};
use crate::metrics::{EvaluationReport, ForecastSeries, MetricsError, Scores};
use crate::models::gp::GpParams;
use crate::models::knn::Weighting;
use crate::models::mlp::MlpConfig;
use crate::models::{Forecaster, Hyperparams, ModelError, ModelKind};
use crate::tuning::{self, GridSpec, TuningError};

/// Plan construction failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BacktestError {
    /// The dataset has no records.
    #[error("dataset is empty")]
    EmptyDataset,
    /// No full year of data precedes the test year.
    #[error("no full year of training data before test year {0}")]
    InsufficientHistory(i32),
    /// The test year is not fully covered by the data.
    #[error("test year {0} is not fully covered by the data")]
    IncompleteTestYear(i32),
    /// A test year appears twice.
    #[error("test year {0} listed twice")]
    DuplicateTestYear(i32),
    /// Nothing to run.
    #[error("no {0} selected")]
    EmptySelection(&'static str),
    /// The actual-temperature session needs the `temp_actual` column.
    #[error("the actual-temperature session needs temp_actual on every record")]
    MissingActualTemperature,
}

/// Why one (split, model, source) task failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaskError {
    /// Fitting or prediction failed.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Tuning failed.
    #[error(transparent)]
    Tuning(#[from] TuningError),
    /// Feature assembly failed.
    #[error(transparent)]
    Feature(#[from] FeatureError),
    /// Scoring failed.
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// One train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    /// Test year.
    pub year: i32,
    /// First training day.
    pub train_from: CivilDate,
    /// Last training day (December 31 of the previous year).
    pub train_to: CivilDate,
    /// January 1 of the test year.
    pub test_from: CivilDate,
    /// December 31 of the test year.
    pub test_to: CivilDate,
}

/// Expanding splits, one per test year, in the given order.
pub fn expanding_splits(dataset: &Dataset, test_years: &[i32]) -> Result<Vec<Split>, BacktestError> {
    let (first, last) = match (dataset.first_date(), dataset.last_date()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(BacktestError::EmptyDataset),
    };
    if test_years.is_empty() {
        return Err(BacktestError::EmptySelection("test years"));
    }
    let mut out: Vec<Split> = Vec::with_capacity(test_years.len());
    for &year in test_years {
        if out.iter().any(|s| s.year == year) {
            return Err(BacktestError::DuplicateTestYear(year));
        }
        let test_from = CivilDate::ymd(year, 1, 1);
        let test_to = CivilDate::ymd(year, 12, 31);
        if first > CivilDate::ymd(year - 1, 1, 1) {
            return Err(BacktestError::InsufficientHistory(year));
        }
        if last < test_to || dataset.range(test_from, test_to).len() != 365 + crate::calendar::is_leap_year(year) as usize {
            return Err(BacktestError::IncompleteTestYear(year));
        }
        out.push(Split { year, train_from: first, train_to: test_from.pred(), test_from, test_to });
    }
    Ok(out)
}

/// Candidate hyperparameters for every model kind.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TuningGrids {
    /// Cross-validation folds.
    pub folds: usize,
    /// Ridge λ values.
    pub ridge_lambdas: Vec<f64>,
    /// KNN neighbour counts.
    pub knn_k: Vec<usize>,
    /// KNN weightings.
    pub knn_weightings: Vec<Weighting>,
    /// Matérn ν values.
    pub gp_nu: Vec<f64>,
    /// GP length-scales.
    pub gp_length_scales: Vec<f64>,
    /// GP noise variances (standardized target scale).
    pub gp_noise_variances: Vec<f64>,
    /// Rows of the evenly strided subsample used for the likelihood search.
    pub gp_tuning_rows: usize,
    /// MLP learning rates; a single rate and batch size skip cross-validation.
    pub mlp_learning_rates: Vec<f64>,
    /// MLP batch sizes.
    pub mlp_batch_sizes: Vec<usize>,
    /// Remaining MLP settings.
    pub mlp: MlpConfig,
    /// Torus yearly harmonic counts.
    pub torus_n_yearly: Vec<usize>,
    /// Torus weekly harmonic counts.
    pub torus_n_weekly: Vec<usize>,
}

impl Default for TuningGrids {
    fn default() -> Self {
        Self {
            folds: 5,
            ridge_lambdas: tuning::log_space(1e-4, 1e2, 13),
            knn_k: (1..=30).collect(),
            knn_weightings: alloc::vec![Weighting::Uniform, Weighting::InverseDistance],
            gp_nu: alloc::vec![0.5, 1.5, 2.5],
            gp_length_scales: alloc::vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            gp_noise_variances: alloc::vec![0.003, 0.01, 0.03, 0.1, 0.3],
            gp_tuning_rows: 800,
            mlp_learning_rates: alloc::vec![0.001],
            mlp_batch_sizes: alloc::vec![32],
            mlp: MlpConfig::default(),
            torus_n_yearly: (0..=4).collect(),
            torus_n_weekly: (0..=4).collect(),
        }
    }
}

/// Everything a backtest run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestPlan {
    /// Train/test splits.
    pub splits: Vec<Split>,
    /// Models in report order.
    pub models: Vec<ModelKind>,
    /// Temperature sessions.
    pub sessions: Vec<TemperatureSource>,
    /// Tuning grids.
    pub grids: TuningGrids,
    /// Test days per task re-forecast on truncated data as a look-ahead check.
    pub audit_days: usize,
}

impl BacktestPlan {
    /// Expanding-window plan over `test_years`.
    pub fn new(
        dataset: &Dataset,
        test_years: &[i32],
        models: &[ModelKind],
        sessions: &[TemperatureSource],
        grids: TuningGrids,
    ) -> Result<Self, BacktestError> {
        if models.is_empty() {
            return Err(BacktestError::EmptySelection("models"));
        }
        if sessions.is_empty() {
            return Err(BacktestError::EmptySelection("temperature sessions"));
        }
        if sessions.contains(&TemperatureSource::Actual) && !dataset.has_actual_temperature() {
            return Err(BacktestError::MissingActualTemperature);
        }
        Ok(Self {
            splits: expanding_splits(dataset, test_years)?,
            models: models.to_vec(),
            sessions: sessions.to_vec(),
            grids,
            audit_days: 3,
        })
    }

    /// One task per session × split × model, in report order.
    pub fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::new();
        for &source in &self.sessions {
            for &split in &self.splits {
                for &model in &self.models {
                    out.push(Task { split, model, source });
                }
            }
        }
        out
    }
}

/// A unit of backtest work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Task {
    /// Split.
    pub split: Split,
    /// Model kind.
    pub model: ModelKind,
    /// Temperature source.
    pub source: TemperatureSource,
}

/// Result of re-forecasting one day from data truncated after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOutcome {
    /// Forecast day.
    pub date: CivilDate,
    /// Forecast from the full dataset.
    pub full: f64,
    /// Forecast with later records removed and the day's demand overwritten.
    pub truncated: f64,
}

impl AuditOutcome {
    /// Both forecasts are bit-identical.
    pub fn passed(&self) -> bool {
        self.full.to_bits() == self.truncated.to_bits()
    }
}

const SENTINEL_DEMAND: f64 = 1.0e6;

/// Forecast `t` twice: from the full dataset, and from a copy holding nothing
/// after `t` whose demand on `t` is replaced by a sentinel.
pub fn audit_no_lookahead(forecaster: &Forecaster, dataset: &Dataset, t: CivilDate) -> Result<AuditOutcome, ModelError> {
    let full = forecaster.predict_day(dataset, t)?;
    let record = *dataset.get(t).ok_or(FeatureError::MissingLag { date: t, needed: t })?;
    let blind = dataset
        .truncated_after(t)
        .with_record(DailyRecord { rgd: SENTINEL_DEMAND, ..record })?;
    let truncated = forecaster.predict_day(&blind, t)?;
    Ok(AuditOutcome { date: t, full, truncated })
}

/// Select hyperparameters on the training window and fit.
pub fn tune_and_fit(
    task: &Task,
    dataset: &Dataset,
    calendar: &HolidayCalendar,
    grids: &TuningGrids,
) -> Result<Forecaster, TaskError> {
    let Split { train_from: from, train_to: to, .. } = task.split;
    let source = task.source;
    if task.model == ModelKind::Torus {
        let t = tuning::torus_tune(dataset, from, to, &grids.torus_n_yearly, &grids.torus_n_weekly, source, calendar)?;
        let params = Hyperparams::Torus { n_yearly: t.n_yearly, n_weekly: t.n_weekly };
        return Ok(Forecaster::fit(&params, dataset, from, to, source, calendar)?);
    }
    let fm = features::build_matrix(dataset, from, to, source, calendar)?;
    let params = match task.model {
        ModelKind::Ridge => tuning::kfold_grid_search(&fm, &GridSpec::ridge(&grids.ridge_lambdas, grids.folds))?.best,
        ModelKind::Knn => {
            tuning::kfold_grid_search(&fm, &GridSpec::knn(&grids.knn_k, &grids.knn_weightings, grids.folds))?.best
        }
        ModelKind::Mlp => {
            let grid = GridSpec::mlp(&grids.mlp_learning_rates, &grids.mlp_batch_sizes, &grids.mlp, grids.folds);
            match grid.points.as_slice() {
                [only] => only.clone(),
                _ => tuning::kfold_grid_search(&fm, &grid)?.best,
            }
        }
        ModelKind::Gp => {
            let idx = tuning::strided_subsample(fm.n_rows(), grids.gp_tuning_rows.max(1));
            let sub = fm.select_rows(&idx);
            let best: GpParams =
                tuning::gp_tune(&sub.x, &sub.y, &grids.gp_nu, &grids.gp_length_scales, &grids.gp_noise_variances)?
                    .params;
            Hyperparams::Gp(best)
        }
        ModelKind::Torus => unreachable!(),
    };
    Ok(Forecaster::fit_matrix(&params, &fm, source, calendar)?)
}

/// Forecasts and scores of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Test year.
    pub year: i32,
    /// Model kind.
    pub model: ModelKind,
    /// Temperature source.
    pub source: TemperatureSource,
    /// Selected hyperparameters.
    pub hyperparams: Hyperparams,
    /// Test-year scores.
    pub scores: Scores,
    /// Daily forecasts.
    pub series: ForecastSeries,
    /// Look-ahead audits run on this task.
    pub audits: Vec<AuditOutcome>,
    /// The fitted model.
    pub forecaster: Forecaster,
}

/// A task that produced no row.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskFailure {
    /// The task.
    pub task: Task,
    /// Cause.
    pub error: TaskError,
}

impl core::fmt::Display for TaskFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} model, test year {}, {} temperature: {}",
            self.task.model,
            self.task.split.year,
            self.task.source.as_str(),
            self.error
        )
    }
}

fn audit_dates(split: &Split, count: usize) -> Vec<CivilDate> {
    let span = split.test_to.days_since(split.test_from);
    match count {
        0 => Vec::new(),
        1 => alloc::vec![split.test_from],
        c => (0..c).map(|i| split.test_from.add_days(span * i as i64 / (c - 1) as i64)).collect(),
    }
}

/// Tune, fit, forecast the test year and audit a few days.
pub fn evaluate_task(
    task: &Task,
    dataset: &Dataset,
    calendar: &HolidayCalendar,
    grids: &TuningGrids,
    audit_days: usize,
) -> Result<ReportRow, TaskFailure> {
    let fail = |error: TaskError| TaskFailure { task: *task, error };
    let forecaster = tune_and_fit(task, dataset, calendar, grids).map_err(fail)?;
    let mut series = ForecastSeries::default();
    for rec in dataset.range(task.split.test_from, task.split.test_to) {
        let p = forecaster.predict_day(dataset, rec.date).map_err(|e| fail(e.into()))?;
        series.push(rec.date, rec.rgd, p);
    }
    let scores = series.scores().map_err(|e| fail(e.into()))?;
    let audits = audit_dates(&task.split, audit_days)
        .into_iter()
        .map(|t| audit_no_lookahead(&forecaster, dataset, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(e.into()))?;
    Ok(ReportRow {
        year: task.split.year,
        model: task.model,
        source: task.source,
        hyperparams: forecaster.hyperparams.clone(),
        scores,
        series,
        audits,
        forecaster,
    })
}

/// Session-1 RMSE propagated to session 2 versus the measured session-2 RMSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseComparison {
    /// Model kind.
    pub model: ModelKind,
    /// Test year, or `None` for all test years pooled.
    pub year: Option<i32>,
    /// RMSE with actual temperatures (its square is σ₀²).
    pub actual_rmse: f64,
    /// Propagation parameters estimated on the test period.
    pub params: ErrorPropParams,
    /// `√(σ₀² + P·α²·σ²ε)`.
    pub predicted_rmse: f64,
    /// Measured RMSE with forecast temperatures.
    pub forecast_rmse: f64,
}

impl RmseComparison {
    /// `(measured − predicted) / predicted`.
    pub fn relative_gap(&self) -> f64 {
        (self.forecast_rmse - self.predicted_rmse) / self.predicted_rmse
    }
}

/// Outcome of a full backtest.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    /// Rows in session × split × model order.
    pub rows: Vec<ReportRow>,
    /// Tasks that failed.
    pub failures: Vec<TaskFailure>,
    /// Propagation check per model and year, plus pooled rows.
    pub comparisons: Vec<RmseComparison>,
    /// Comparisons that could not be computed.
    pub comparison_errors: Vec<(ModelKind, Option<i32>, ErrorPropError)>,
}

impl BacktestReport {
    /// The row for one task, if it succeeded.
    pub fn row(&self, year: i32, model: ModelKind, source: TemperatureSource) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.year == year && r.model == model && r.source == source)
    }

    /// Pooled evaluation of one model under one source.
    pub fn evaluation(&self, model: ModelKind, source: TemperatureSource) -> Option<EvaluationReport> {
        let parts: Vec<&ForecastSeries> =
            self.rows.iter().filter(|r| r.model == model && r.source == source).map(|r| &r.series).collect();
        if parts.is_empty() {
            return None;
        }
        EvaluationReport::from_series(ForecastSeries::pooled(parts)).ok()
    }

    /// Every audit passed.
    pub fn audits_passed(&self) -> bool {
        self.rows.iter().all(|r| r.audits.iter().all(AuditOutcome::passed))
    }
}

fn comparison(
    model: ModelKind,
    year: Option<i32>,
    actual: &ForecastSeries,
    forecast: &ForecastSeries,
    records: &[DailyRecord],
) -> Result<RmseComparison, ErrorPropError> {
    let actual_rmse = actual.scores().map_err(|_| ErrorPropError::Empty)?.rmse;
    let forecast_rmse = forecast.scores().map_err(|_| ErrorPropError::Empty)?.rmse;
    let params = errorprop::estimate_params(records, actual_rmse * actual_rmse)?;
    Ok(RmseComparison { model, year, actual_rmse, params, predicted_rmse: params.predicted_rmse(), forecast_rmse })
}

/// Collect task results and derive the session comparison.
pub fn assemble(plan: &BacktestPlan, dataset: &Dataset, results: Vec<Result<ReportRow, TaskFailure>>) -> BacktestReport {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }
    let mut report = BacktestReport { rows, failures, comparisons: Vec::new(), comparison_errors: Vec::new() };
    let both = plan.sessions.contains(&TemperatureSource::Actual) && plan.sessions.contains(&TemperatureSource::Forecast);
    if !both {
        return report;
    }
    let mut comparisons = Vec::new();
    let mut errors = Vec::new();
    for &model in &plan.models {
        let mut pooled_actual = Vec::new();
        let mut pooled_forecast = Vec::new();
        let mut pooled_records = Vec::new();
        for split in &plan.splits {
            let (Some(a), Some(f)) = (
                report.row(split.year, model, TemperatureSource::Actual),
                report.row(split.year, model, TemperatureSource::Forecast),
            ) else {
                continue;
            };
            let records = dataset.range(split.test_from, split.test_to);
            match comparison(model, Some(split.year), &a.series, &f.series, records) {
                Ok(c) => comparisons.push(c),
                Err(e) => errors.push((model, Some(split.year), e)),
            }
            pooled_actual.push(a.series.clone());
            pooled_forecast.push(f.series.clone());
            pooled_records.extend_from_slice(records);
        }
        if pooled_actual.len() > 1 {
            let a = ForecastSeries::pooled(&pooled_actual);
            let f = ForecastSeries::pooled(&pooled_forecast);
            match comparison(model, None, &a, &f, &pooled_records) {
                Ok(c) => comparisons.push(c),
                Err(e) => errors.push((model, None, e)),
            }
        }
    }
    report.comparisons = comparisons;
    report.comparison_errors = errors;
    report
}

/// Run every task sequentially.
pub fn run_backtest(plan: &BacktestPlan, dataset: &Dataset, calendar: &HolidayCalendar) -> BacktestReport {
    let results = plan
        .tasks()
        .iter()
        .map(|t| evaluate_task(t, dataset, calendar, &plan.grids, plan.audit_days))
        .collect();
    assemble(plan, dataset, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(from: CivilDate, to: CivilDate) -> Dataset {
        let recs = from
            .range_inclusive(to)
            .map(|d| DailyRecord { date: d, rgd: 10.0, temp_forecast: 10.0, temp_actual: Some(10.0) })
            .collect();
        Dataset::new(recs).unwrap()
    }

    #[test]
    fn splits_expand() {
        let ds = flat(CivilDate::ymd(2007, 1, 1), CivilDate::ymd(2017, 12, 31));
        let s = expanding_splits(&ds, &[2015, 2016, 2017]).unwrap();
        let ends: Vec<CivilDate> = s.iter().map(|s| s.train_to).collect();
        assert_eq!(ends, [CivilDate::ymd(2014, 12, 31), CivilDate::ymd(2015, 12, 31), CivilDate::ymd(2016, 12, 31)]);
        assert!(s.iter().all(|s| s.train_from == CivilDate::ymd(2007, 1, 1)));
        assert_eq!(expanding_splits(&ds, &[2007]), Err(BacktestError::InsufficientHistory(2007)));
        assert_eq!(expanding_splits(&ds, &[2018]), Err(BacktestError::IncompleteTestYear(2018)));
        assert_eq!(expanding_splits(&ds, &[2016]).unwrap().len(), 1);
    }

    #[test]
    fn audit_dates_cover_year() {
        let ds = flat(CivilDate::ymd(2014, 1, 1), CivilDate::ymd(2015, 12, 31));
        let s = expanding_splits(&ds, &[2015]).unwrap()[0];
        let d = audit_dates(&s, 3);
        assert_eq!(d, [CivilDate::ymd(2015, 1, 1), CivilDate::ymd(2015, 7, 2), CivilDate::ymd(2015, 12, 31)]);
    }
}
