//! Error metrics, monthly aggregation and exploratory diagnostics.

use alloc::vec::Vec;

use crate::calendar::CivilDate;
use crate::math;

/// Metric failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    /// Actual and predicted series differ in length.
    #[error("{actual} actual values but {predicted} predictions")]
    LengthMismatch {
        /// Actual length.
        actual: usize,
        /// Predicted length.
        predicted: usize,
    },
    /// No values.
    #[error("empty series")]
    Empty,
    /// MAPE on a non-positive target.
    #[error("MAPE undefined: actual value at index {0} is not positive")]
    ZeroTarget(usize),
    /// MAE/RMSE ratio with all-zero residuals.
    #[error("RMSE is zero")]
    ZeroRmse,
    /// Correlation or autocorrelation of a constant series.
    #[error("series is constant")]
    ConstantSeries,
    /// ACF lag not smaller than the series length.
    #[error("series of length {len} is too short for lag {max_lag}")]
    TooShort {
        /// Series length.
        len: usize,
        /// Requested maximum lag.
        max_lag: usize,
    },
    /// NaN or infinity in the input.
    #[error("series contains non-finite values")]
    NonFinite,
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch { actual: actual.len(), predicted: predicted.len() });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| math::abs(a - p)).sum();
    Ok(s / actual.len() as f64)
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    if let Some(i) = actual.iter().position(|a| !(*a > 0.0)) {
        return Err(MetricsError::ZeroTarget(i));
    }
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| math::abs(a - p) / a).sum();
    Ok(100.0 * s / actual.len() as f64)
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    let s: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(math::sqrt(s / actual.len() as f64))
}

/// `MAE / RMSE` of a residual vector; `√(2/π)` for Gaussian residuals.
pub fn mae_rmse_ratio(residuals: &[f64]) -> Result<f64, MetricsError> {
    if residuals.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = residuals.len() as f64;
    let mae = residuals.iter().map(|r| math::abs(*r)).sum::<f64>() / n;
    let rmse = math::sqrt(residuals.iter().map(|r| r * r).sum::<f64>() / n);
    if rmse == 0.0 {
        return Err(MetricsError::ZeroRmse);
    }
    Ok(mae / rmse)
}

/// `√(2/π)`, the MAE/RMSE ratio of a zero-mean Gaussian.
pub fn gaussian_reference() -> f64 {
    math::sqrt(2.0 / core::f64::consts::PI)
}

/// MAE, MAPE and RMSE of one set of forecasts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scores {
    /// Number of forecasts.
    pub n: usize,
    /// MSCM.
    pub mae: f64,
    /// Percent; `None` when some actual value is not positive.
    pub mape: Option<f64>,
    /// MSCM.
    pub rmse: f64,
}

impl Scores {
    /// Score a forecast.
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self, MetricsError> {
        Ok(Self {
            n: actual.len(),
            mae: mae(actual, predicted)?,
            mape: mape(actual, predicted).ok(),
            rmse: rmse(actual, predicted)?,
        })
    }
}

/// Dated forecasts next to the realized values.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForecastSeries {
    /// Forecast dates, ascending.
    pub dates: Vec<CivilDate>,
    /// Realized demand.
    pub actual: Vec<f64>,
    /// Forecast demand.
    pub predicted: Vec<f64>,
}

impl ForecastSeries {
    /// Append one day.
    pub fn push(&mut self, date: CivilDate, actual: f64, predicted: f64) {
        self.dates.push(date);
        self.actual.push(actual);
        self.predicted.push(predicted);
    }

    /// Number of days.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    /// No days.
    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// `actual − predicted`.
    pub fn residuals(&self) -> Vec<f64> {
        self.actual.iter().zip(&self.predicted).map(|(a, p)| a - p).collect()
    }

    /// Scores over the whole series.
    pub fn scores(&self) -> Result<Scores, MetricsError> {
        Scores::compute(&self.actual, &self.predicted)
    }

    /// Concatenate several series and sort by date.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a ForecastSeries>) -> Self {
        let mut rows: Vec<(CivilDate, f64, f64)> = parts
            .into_iter()
            .flat_map(|s| s.dates.iter().zip(&s.actual).zip(&s.predicted).map(|((d, a), p)| (*d, *a, *p)))
            .collect();
        rows.sort_by_key(|r| r.0);
        let mut out = Self::default();
        for (d, a, p) in rows {
            out.push(d, a, p);
        }
        out
    }
}

/// Monthly MAE and MAPE averaged over all years in the series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonthlyRow {
    /// Calendar month 1..=12.
    pub month: u32,
    /// Days in the group.
    pub n: usize,
    /// MSCM.
    pub mae: f64,
    /// Percent; `None` when some actual value is not positive.
    pub mape: Option<f64>,
}

/// Group forecasts by calendar month. Months without data are absent.
pub fn monthly_breakdown(series: &ForecastSeries) -> Vec<MonthlyRow> {
    let mut out = Vec::new();
    for month in 1..=12u32 {
        let (mut actual, mut predicted) = (Vec::new(), Vec::new());
        for ((d, a), p) in series.dates.iter().zip(&series.actual).zip(&series.predicted) {
            if d.month() == month {
                actual.push(*a);
                predicted.push(*p);
            }
        }
        if actual.is_empty() {
            continue;
        }
        out.push(MonthlyRow {
            month,
            n: actual.len(),
            mae: mae(&actual, &predicted).unwrap_or(f64::NAN),
            mape: mape(&actual, &predicted).ok(),
        });
    }
    out
}

/// Yearly, pooled and monthly scores of one model under one temperature source.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvaluationReport {
    /// Scores per calendar year.
    pub yearly: Vec<(i32, Scores)>,
    /// Scores over all years.
    pub aggregate: Scores,
    /// Monthly MAE and MAPE.
    pub monthly: Vec<MonthlyRow>,
    /// MAE/RMSE of the pooled residuals (`None` for perfect forecasts).
    pub mae_rmse_ratio: Option<f64>,
    /// The pooled forecasts.
    pub series: ForecastSeries,
}

impl EvaluationReport {
    /// Summarize a forecast series.
    pub fn from_series(series: ForecastSeries) -> Result<Self, MetricsError> {
        let aggregate = series.scores()?;
        let mut years: Vec<i32> = series.dates.iter().map(|d| d.year()).collect();
        years.dedup();
        let mut yearly = Vec::with_capacity(years.len());
        for y in years {
            let idx: Vec<usize> = (0..series.len()).filter(|&i| series.dates[i].year() == y).collect();
            let a: Vec<f64> = idx.iter().map(|&i| series.actual[i]).collect();
            let p: Vec<f64> = idx.iter().map(|&i| series.predicted[i]).collect();
            yearly.push((y, Scores::compute(&a, &p)?));
        }
        Ok(Self {
            yearly,
            aggregate,
            monthly: monthly_breakdown(&series),
            mae_rmse_ratio: mae_rmse_ratio(&series.residuals()).ok(),
            series,
        })
    }
}

fn finite_moments(series: &[f64]) -> Result<(f64, f64), MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::Empty);
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mean = math::mean(series);
    let ss: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss == 0.0 {
        return Err(MetricsError::ConstantSeries);
    }
    Ok((mean, ss))
}

/// Biased sample autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>, MetricsError> {
    if series.len() <= max_lag {
        return Err(MetricsError::TooShort { len: series.len(), max_lag });
    }
    let (mean, ss) = finite_moments(series)?;
    let c: Vec<f64> = series.iter().map(|v| v - mean).collect();
    Ok((0..=max_lag)
        .map(|k| c[k..].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / ss)
        .collect())
}

/// One periodogram ordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    /// Frequency index k.
    pub index: usize,
    /// Period `n / k` in samples.
    pub period: f64,
    /// One-sided power.
    pub power: f64,
}

/// One-sided periodogram of the mean-removed series for `k = 1..=n/2`.
///
/// Power is `2|X_k|²/n²` (`|X_k|²/n²` at Nyquist), so the ordinates sum to
/// the biased variance.
pub fn periodogram(series: &[f64]) -> Result<Vec<SpectralPoint>, MetricsError> {
    let n = series.len();
    if n < 2 {
        return Err(MetricsError::TooShort { len: n, max_lag: 1 });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mean = math::mean(series);
    let c: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let (cos, sin): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|m| {
            let a = math::TAU * m as f64 / n as f64;
            (math::cos(a), math::sin(a))
        })
        .unzip();
    let n2 = (n * n) as f64;
    Ok((1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            let mut idx = 0usize;
            for v in &c {
                re += v * cos[idx];
                im -= v * sin[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            let scale = if 2 * k == n { 1.0 } else { 2.0 };
            SpectralPoint { index: k, period: n as f64 / k as f64, power: scale * (re * re + im * im) / n2 }
        })
        .collect())
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    check(x, y)?;
    let (mx, sx) = finite_moments(x)?;
    let (my, sy) = finite_moments(y)?;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok((sxy / math::sqrt(sx * sy)).clamp(-1.0, 1.0))
}
