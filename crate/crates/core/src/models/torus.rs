//! Torus model: log demand regressed on a tensor product of yearly and weekly
//! harmonics, a linear trend, holiday flags and heating degree days, with a
//! previous-day ratio correction for day-ahead forecasting.
//!
//! Time `t` is counted in days from 2000-01-01. The regressor row is
//!
//! * `(1 + 2N_d)(1 + 2N_w)` products `dⱼ(t)·wₖ(t)`, with
//!   `d = [1, cos(Ψt)..cos(N_dΨt), sin(Ψt)..sin(N_dΨt)]` (outer index) and
//!   `w = [1, cos(Ωt)..cos(N_wΩt), sin(Ωt)..sin(N_wΩt)]` (inner index),
//!   `Ψ = 2π/365.25`, `Ω = 2π/7`. The first product is the constant.
//! * trend `t / 365.25` (years since the origin),
//! * `holiday`, `day_after_holiday`, `bridge_holiday` indicators,
//! * `HDD(t)` and `HDD(t) − HDD(t−1)`.

use alloc::vec::Vec;

use super::ModelError;
use crate::calendar::{CivilDate, HolidayCalendar};
use crate::features::{hdd, Dataset, FeatureError, TemperatureSource};
use crate::linalg::{dot, lstsq, Matrix};
use crate::math;

/// Yearly angular frequency Ψ, rad/day.
pub const YEARLY_FREQUENCY: f64 = math::TAU / 365.25;
/// Weekly angular frequency Ω, rad/day.
pub const WEEKLY_FREQUENCY: f64 = math::TAU / 7.0;
/// Regressors beyond the harmonic basis.
pub const N_EXTRA: usize = 6;
/// 2000-01-01 in days since 1970-01-01.
const ORIGIN_DAYS: i64 = 10_957;
/// Relative RSS floor for AIC, below which fits are treated as exact.
const RSS_FLOOR: f64 = 1e-20;

/// Days since 2000-01-01.
pub fn time_index(t: CivilDate) -> f64 {
    (t.to_days() - ORIGIN_DAYS) as f64
}

/// `[1, cos(f t)..cos(n f t), sin(f t)..sin(n f t)]`.
pub fn harmonics(n: usize, frequency: f64, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(1 + 2 * n);
    out.push(1.0);
    out.extend((1..=n).map(|j| math::cos(j as f64 * frequency * t)));
    out.extend((1..=n).map(|j| math::sin(j as f64 * frequency * t)));
    out
}

/// The multiperiodic basis, `(1 + 2N_d)(1 + 2N_w)` entries.
pub fn multiperiodic_basis(t: f64, n_yearly: usize, n_weekly: usize) -> Vec<f64> {
    let d = harmonics(n_yearly, YEARLY_FREQUENCY, t);
    let w = harmonics(n_weekly, WEEKLY_FREQUENCY, t);
    let mut out = Vec::with_capacity(d.len() * w.len());
    for dj in &d {
        for wk in &w {
            out.push(dj * wk);
        }
    }
    out
}

/// Size of the multiperiodic basis.
pub fn basis_size(n_yearly: usize, n_weekly: usize) -> usize {
    (1 + 2 * n_yearly) * (1 + 2 * n_weekly)
}

/// Full regressor row for day `t` given its temperature and the previous day's.
pub fn regressors(
    t: CivilDate,
    temp: f64,
    temp_prev: f64,
    calendar: &HolidayCalendar,
    n_yearly: usize,
    n_weekly: usize,
) -> Vec<f64> {
    let ti = time_index(t);
    let mut row = multiperiodic_basis(ti, n_yearly, n_weekly);
    row.push(ti / 365.25);
    row.push(calendar.is_holiday(t) as u8 as f64);
    row.push(calendar.is_day_after_holiday(t) as u8 as f64);
    row.push(calendar.is_bridge_holiday(t) as u8 as f64);
    let h = hdd(temp);
    row.push(h);
    row.push(h - hdd(temp_prev));
    row
}

/// Fitted long-term log model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TorusModel {
    /// Yearly harmonics N_d.
    pub n_yearly: usize,
    /// Weekly harmonics N_w.
    pub n_weekly: usize,
    /// Temperature column feeding HDD.
    pub source: TemperatureSource,
    /// One coefficient per regressor (zero where inactive).
    pub coefficients: Vec<f64>,
    /// Regressors that were non-zero somewhere in the training window.
    pub active: Vec<bool>,
    /// Residual sum of squares of the log fit.
    pub rss: f64,
    /// Total sum of squares of the centered log demand.
    pub tss: f64,
    /// Training observations.
    pub n_obs: usize,
    /// Holiday calendar.
    pub calendar: HolidayCalendar,
}

fn temperatures(dataset: &Dataset, t: CivilDate, source: TemperatureSource) -> Result<(f64, f64), FeatureError> {
    let get = |d: CivilDate| {
        let r = dataset.get(d).ok_or(FeatureError::MissingLag { date: t, needed: d })?;
        r.temperature(source).ok_or(FeatureError::MissingTemperature(d))
    };
    Ok((get(t)?, get(t.pred())?))
}

/// Least-squares fit of log demand over the records dated in `[from, to]`
/// whose previous day is also present.
pub fn torus_fit(
    dataset: &Dataset,
    from: CivilDate,
    to: CivilDate,
    n_yearly: usize,
    n_weekly: usize,
    source: TemperatureSource,
    calendar: &HolidayCalendar,
) -> Result<TorusModel, ModelError> {
    let p = basis_size(n_yearly, n_weekly) + N_EXTRA;
    let mut data = Vec::new();
    let mut target = Vec::new();
    for rec in dataset.range(from, to) {
        let (temp, temp_prev) = match temperatures(dataset, rec.date, source) {
            Ok(v) => v,
            Err(FeatureError::MissingLag { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        if !(rec.rgd > 0.0) {
            return Err(ModelError::NonPositiveDemand(rec.date));
        }
        data.extend(regressors(rec.date, temp, temp_prev, calendar, n_yearly, n_weekly));
        target.push(math::ln(rec.rgd));
    }
    let n = target.len();
    if n == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    let full = Matrix::from_vec(n, p, data);
    let active: Vec<bool> = (0..p).map(|j| full.iter_rows().any(|r| r[j] != 0.0)).collect();
    let cols: Vec<usize> = (0..p).filter(|&j| active[j]).collect();
    let mut reduced = Vec::with_capacity(n * cols.len());
    for r in full.iter_rows() {
        reduced.extend(cols.iter().map(|&j| r[j]));
    }
    let fit = lstsq(&Matrix::from_vec(n, cols.len(), reduced), &target)?;
    let mut coefficients = alloc::vec![0.0; p];
    for (&j, c) in cols.iter().zip(&fit.coefficients) {
        coefficients[j] = *c;
    }
    let mean = math::mean(&target);
    let tss = target.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(TorusModel {
        n_yearly,
        n_weekly,
        source,
        coefficients,
        active,
        rss: fit.rss,
        tss,
        n_obs: n,
        calendar: calendar.clone(),
    })
}

impl TorusModel {
    /// Number of fitted regressors.
    pub fn n_regressors(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    /// `n ln(RSS/n) + 2k` under Gaussian residuals. RSS is floored at a tiny
    /// fraction of the total sum of squares so exact fits compare equal.
    pub fn aic(&self) -> f64 {
        let n = self.n_obs as f64;
        let rss = self.rss.max(RSS_FLOOR * self.tss).max(f64::MIN_POSITIVE);
        n * math::ln(rss / n) + 2.0 * self.n_regressors() as f64
    }

    /// Fitted log demand from explicit temperatures.
    pub fn log_long_term_with(&self, t: CivilDate, temp: f64, temp_prev: f64) -> f64 {
        let row = regressors(t, temp, temp_prev, &self.calendar, self.n_yearly, self.n_weekly);
        dot(&row, &self.coefficients)
    }

    /// Long-term forecast `exp(L + F + ΣH + HDD terms)` in MSCM.
    pub fn long_term(&self, dataset: &Dataset, t: CivilDate) -> Result<f64, ModelError> {
        let (temp, temp_prev) = temperatures(dataset, t, self.source)?;
        Ok(math::exp(self.log_long_term_with(t, temp, temp_prev)))
    }

    /// Day-ahead forecast corrected by yesterday's realized demand.
    pub fn predict(&self, dataset: &Dataset, t: CivilDate, rgd_prev: f64) -> Result<f64, ModelError> {
        if !(rgd_prev > 0.0) {
            return Err(ModelError::NonPositiveDemand(t.pred()));
        }
        let today = self.long_term(dataset, t)?;
        let yesterday = self.long_term(dataset, t.pred())?;
        Ok(today * (rgd_prev / yesterday))
    }
}
