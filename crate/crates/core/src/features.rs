//! Daily records and the 21-covariate design matrix.
//!
//! Column layout of every feature row:
//!
//! | idx | name | kind |
//! |-----|------|------|
//! | 0..4 | `rgd_lag1`, `rgd_lag7`, `rgd_sim`, `rgd_sim_lag1` | demand, MSCM |
//! | 4..8 | `temp`, `temp_lag1`, `temp_lag7`, `temp_sim` | °C |
//! | 8..12 | `hdd`, `hdd_lag1`, `hdd_lag7`, `hdd_sim` | °C |
//! | 12..18 | `dow_mon` .. `dow_sat` | weekday dummies, Sunday dropped |
//! | 18..21 | `holiday`, `day_after_holiday`, `bridge_holiday` | 0/1 |
//!
//! The first twelve columns are continuous and get standardized; the rest
//! are left as 0/1.

use alloc::vec::Vec;

use crate::calendar::{CivilDate, HolidayCalendar};
use crate::linalg::Matrix;
use crate::math;

/// Number of covariates per row.
pub const N_FEATURES: usize = 21;
/// Leading columns that are continuous and standardized.
pub const N_CONTINUOUS: usize = 12;

/// Column names in matrix order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "rgd_lag1",
    "rgd_lag7",
    "rgd_sim",
    "rgd_sim_lag1",
    "temp",
    "temp_lag1",
    "temp_lag7",
    "temp_sim",
    "hdd",
    "hdd_lag1",
    "hdd_lag7",
    "hdd_sim",
    "dow_mon",
    "dow_tue",
    "dow_wed",
    "dow_thu",
    "dow_fri",
    "dow_sat",
    "holiday",
    "day_after_holiday",
    "bridge_holiday",
];

/// Base temperature of the heating-degree transform, °C.
pub const HDD_BASE: f64 = 18.0;

/// Heating degree days: `max(18 − T, 0)`.
#[inline]
pub fn hdd(temperature: f64) -> f64 {
    (HDD_BASE - temperature).max(0.0)
}

/// Which temperature column feeds the features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum TemperatureSource {
    /// Recorded temperature.
    Actual,
    /// Day-ahead forecast temperature.
    Forecast,
}

impl TemperatureSource {
    /// Lower-case label.
    pub fn as_str(self) -> &'static str {
        match self {
            TemperatureSource::Actual => "actual",
            TemperatureSource::Forecast => "forecast",
        }
    }
}

/// Errors raised while assembling features.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    /// A lagged record needed for the row is absent.
    #[error("missing record for {needed} required by the row of {date}")]
    MissingLag {
        /// Row date.
        date: CivilDate,
        /// Date of the absent record.
        needed: CivilDate,
    },
    /// The actual-temperature column is empty for a needed date.
    #[error("no actual temperature recorded on {0}")]
    MissingTemperature(CivilDate),
    /// No feasible row in the requested range.
    #[error("no feasible feature row in the requested range")]
    EmptyMatrix,
    /// A continuous column has zero variance on the training rows.
    #[error("feature column `{0}` has zero variance")]
    ZeroVariance(&'static str),
    /// A record violates its invariants.
    #[error("invalid record on {date}: {reason}")]
    InvalidRecord {
        /// Record date.
        date: CivilDate,
        /// What is wrong.
        reason: &'static str,
    },
    /// Two records share a date.
    #[error("duplicate record for {0}")]
    DuplicateDate(CivilDate),
}

/// One calendar day of observations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DailyRecord {
    /// Day.
    pub date: CivilDate,
    /// Residential gas demand, MSCM.
    pub rgd: f64,
    /// Day-ahead temperature forecast, °C.
    pub temp_forecast: f64,
    /// Recorded temperature, °C, when available.
    pub temp_actual: Option<f64>,
}

impl DailyRecord {
    /// Temperature from the selected column.
    pub fn temperature(&self, source: TemperatureSource) -> Option<f64> {
        match source {
            TemperatureSource::Actual => self.temp_actual,
            TemperatureSource::Forecast => Some(self.temp_forecast),
        }
    }

    fn validate(&self) -> Result<(), FeatureError> {
        let bad = |reason| Err(FeatureError::InvalidRecord { date: self.date, reason });
        if !self.rgd.is_finite() || self.rgd < 0.0 {
            return bad("demand must be finite and non-negative");
        }
        if !self.temp_forecast.is_finite() {
            return bad("forecast temperature must be finite");
        }
        if let Some(t) = self.temp_actual {
            if !t.is_finite() {
                return bad("actual temperature must be finite");
            }
        }
        Ok(())
    }
}

/// Chronologically ordered daily records with date lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<DailyRecord>,
    first_day: i64,
    contiguous: bool,
}

impl Dataset {
    /// Sort, validate and index the records.
    pub fn new(mut records: Vec<DailyRecord>) -> Result<Self, FeatureError> {
        records.sort_by_key(|r| r.date);
        for w in records.windows(2) {
            if w[0].date == w[1].date {
                return Err(FeatureError::DuplicateDate(w[0].date));
            }
        }
        for r in &records {
            r.validate()?;
        }
        let first_day = records.first().map_or(0, |r| r.date.to_days());
        let contiguous = records
            .last()
            .is_none_or(|r| (r.date.to_days() - first_day) as usize + 1 == records.len());
        Ok(Self { records, first_day, contiguous })
    }

    /// All records in date order.
    pub fn records(&self) -> &[DailyRecord] {
        &self.records
    }

    /// Number of records.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// No records.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First date, if any.
    pub fn first_date(&self) -> Option<CivilDate> {
        self.records.first().map(|r| r.date)
    }

    /// Last date, if any.
    pub fn last_date(&self) -> Option<CivilDate> {
        self.records.last().map(|r| r.date)
    }

    /// Record for `date`.
    pub fn get(&self, date: CivilDate) -> Option<&DailyRecord> {
        if self.contiguous {
            let off = date.to_days() - self.first_day;
            if off < 0 {
                return None;
            }
            self.records.get(off as usize)
        } else {
            self.records
                .binary_search_by_key(&date, |r| r.date)
                .ok()
                .map(|i| &self.records[i])
        }
    }

    /// Records dated in `[from, to]`.
    pub fn range(&self, from: CivilDate, to: CivilDate) -> &[DailyRecord] {
        let lo = self.records.partition_point(|r| r.date < from);
        let hi = self.records.partition_point(|r| r.date <= to);
        &self.records[lo..hi.max(lo)]
    }

    /// Whether both temperature columns are present on every record.
    pub fn has_actual_temperature(&self) -> bool {
        self.records.iter().all(|r| r.temp_actual.is_some())
    }

    /// Copy holding only records dated on or before `last`.
    pub fn truncated_after(&self, last: CivilDate) -> Self {
        let hi = self.records.partition_point(|r| r.date <= last);
        Self { records: self.records[..hi].to_vec(), first_day: self.first_day, contiguous: self.contiguous }
    }

    /// Copy with the record at `date` replaced.
    pub fn with_record(&self, record: DailyRecord) -> Result<Self, FeatureError> {
        let mut records = self.records.clone();
        match records.binary_search_by_key(&record.date, |r| r.date) {
            Ok(i) => records[i] = record,
            Err(i) => records.insert(i, record),
        }
        Self::new(records)
    }
}

/// One assembled row of covariates in the documented column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    /// Value of a named column.
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES.iter().position(|n| *n == name).map(|i| self.0[i])
    }

    /// Values as a slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Assemble the covariates for day `t`.
///
/// Demand lags always come from realized history; temperatures come from
/// `source` for every temperature column, including the similar day.
pub fn build_row(
    dataset: &Dataset,
    t: CivilDate,
    source: TemperatureSource,
    calendar: &HolidayCalendar,
) -> Result<FeatureVector, FeatureError> {
    let fetch = |d: CivilDate| dataset.get(d).ok_or(FeatureError::MissingLag { date: t, needed: d });
    let temp = |r: &DailyRecord| r.temperature(source).ok_or(FeatureError::MissingTemperature(r.date));

    let today = fetch(t)?;
    let lag1 = fetch(t.pred())?;
    let lag7 = fetch(t.add_days(-7))?;
    let sim = fetch(calendar.similar_day(t))?;
    let sim_lag1 = fetch(calendar.similar_day(t.pred()))?;

    let temps = [temp(today)?, temp(lag1)?, temp(lag7)?, temp(sim)?];
    let mut v = [0.0; N_FEATURES];
    v[0] = lag1.rgd;
    v[1] = lag7.rgd;
    v[2] = sim.rgd;
    v[3] = sim_lag1.rgd;
    for (i, &tc) in temps.iter().enumerate() {
        v[4 + i] = tc;
        v[8 + i] = hdd(tc);
    }
    let dow = t.weekday().index();
    if dow < 6 {
        v[12 + dow] = 1.0;
    }
    v[18] = calendar.is_holiday(t) as u8 as f64;
    v[19] = calendar.is_day_after_holiday(t) as u8 as f64;
    v[20] = calendar.is_bridge_holiday(t) as u8 as f64;
    Ok(FeatureVector(v))
}

/// Per-column standardization fitted on training rows, plus target moments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scaler {
    /// Column means (zero for binary columns).
    pub mean: Vec<f64>,
    /// Column standard deviations (one for binary columns).
    pub std: Vec<f64>,
    /// Mean of the training targets.
    pub target_mean: f64,
    /// Population standard deviation of the training targets.
    pub target_std: f64,
}

impl Scaler {
    /// Fit on raw rows; only the first `continuous` columns are scaled.
    pub fn fit(rows: &Matrix, targets: &[f64], continuous: usize) -> Result<Self, FeatureError> {
        let p = rows.cols();
        let mut mean = alloc::vec![0.0; p];
        let mut std = alloc::vec![1.0; p];
        for j in 0..continuous.min(p) {
            let col = rows.column(j);
            let s = math::sqrt(math::variance(&col));
            if !(s > 1e-12 * (1.0 + math::abs(math::mean(&col)))) {
                return Err(FeatureError::ZeroVariance(FEATURE_NAMES.get(j).copied().unwrap_or("?")));
            }
            mean[j] = math::mean(&col);
            std[j] = s;
        }
        let target_mean = math::mean(targets);
        let mut target_std = math::sqrt(math::variance(targets));
        if !(target_std > 0.0) {
            target_std = 1.0;
        }
        Ok(Self { mean, std, target_mean, target_std })
    }

    /// Identity transform for `p` columns.
    pub fn identity(p: usize) -> Self {
        Self { mean: alloc::vec![0.0; p], std: alloc::vec![1.0; p], target_mean: 0.0, target_std: 1.0 }
    }

    /// Standardize one raw row in place.
    pub fn standardize(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
    }

    /// Undo [`Scaler::standardize`] in place.
    pub fn destandardize(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = *v * s + m;
        }
    }

    /// Target in standard units.
    pub fn scale_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    /// Target back in MSCM.
    pub fn unscale_target(&self, z: f64) -> f64 {
        z * self.target_std + self.target_mean
    }
}

/// Standardized design matrix with aligned targets and dates.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// Standardized covariates, one row per date.
    pub x: Matrix,
    /// Targets in MSCM.
    pub y: Vec<f64>,
    /// Row dates, strictly increasing.
    pub dates: Vec<CivilDate>,
    /// Transform that produced `x` from the raw features.
    pub scaler: Scaler,
}

impl FeatureMatrix {
    /// Number of rows.
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    /// Number of columns.
    pub fn n_cols(&self) -> usize {
        self.x.cols()
    }

    /// Covariates in original units.
    pub fn raw(&self) -> Matrix {
        let mut m = self.x.clone();
        for i in 0..m.rows() {
            self.scaler.destandardize(m.row_mut(i));
        }
        m
    }

    /// Subset of rows sharing this matrix's scaler.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            dates: idx.iter().map(|&i| self.dates[i]).collect(),
            scaler: self.scaler.clone(),
        }
    }
}

fn raw_rows(
    dataset: &Dataset,
    from: CivilDate,
    to: CivilDate,
    source: TemperatureSource,
    calendar: &HolidayCalendar,
) -> Result<(Matrix, Vec<f64>, Vec<CivilDate>), FeatureError> {
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut dates = Vec::new();
    for rec in dataset.range(from, to) {
        match build_row(dataset, rec.date, source, calendar) {
            Ok(row) => {
                data.extend_from_slice(row.as_slice());
                y.push(rec.rgd);
                dates.push(rec.date);
            }
            Err(FeatureError::MissingLag { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if y.is_empty() {
        return Err(FeatureError::EmptyMatrix);
    }
    Ok((Matrix::from_vec(y.len(), N_FEATURES, data), y, dates))
}

/// Build every feasible row in `[from, to]` and fit the scaler on them.
pub fn build_matrix(
    dataset: &Dataset,
    from: CivilDate,
    to: CivilDate,
    source: TemperatureSource,
    calendar: &HolidayCalendar,
) -> Result<FeatureMatrix, FeatureError> {
    let (mut x, y, dates) = raw_rows(dataset, from, to, source, calendar)?;
    let scaler = Scaler::fit(&x, &y, N_CONTINUOUS)?;
    for i in 0..x.rows() {
        scaler.standardize(x.row_mut(i));
    }
    Ok(FeatureMatrix { x, y, dates, scaler })
}

/// Build rows in `[from, to]` standardized with an existing (training) scaler.
pub fn build_matrix_with_scaler(
    dataset: &Dataset,
    from: CivilDate,
    to: CivilDate,
    source: TemperatureSource,
    calendar: &HolidayCalendar,
    scaler: &Scaler,
) -> Result<FeatureMatrix, FeatureError> {
    let (mut x, y, dates) = raw_rows(dataset, from, to, source, calendar)?;
    for i in 0..x.rows() {
        scaler.standardize(x.row_mut(i));
    }
    Ok(FeatureMatrix { x, y, dates, scaler: scaler.clone() })
}
