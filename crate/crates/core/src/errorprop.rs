//! Propagation of temperature forecast error into demand forecast error.
//!
//! With demand linear in heating degree days, `RGD = ḡ(x) + α·HDD(T)`, and a
//! forecast `T̂ = T + ε`, the forecast MSE splits into the temperature-free
//! part `σ₀²` and `P(T < 18°)·α²·σ²ε`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::datagen::{simulate_temperatures, DatagenError, GeneratorConfig};
use crate::features::{hdd, DailyRecord, HDD_BASE};
use crate::math;

/// Error-propagation failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ErrorPropError {
    /// A parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    /// No day below the heating threshold, so α cannot be estimated.
    #[error("no day below 18 °C: the heating slope cannot be estimated")]
    NoColdDays,
    /// `P(T<18°)·α²` is zero.
    #[error("P(T<18) * alpha^2 is zero")]
    ZeroDenominator,
    /// A record lacks the recorded temperature.
    #[error("record {0} has no actual temperature")]
    MissingActualTemperature(crate::calendar::CivilDate),
    /// No records.
    #[error("no records")]
    Empty,
    /// The generator config is invalid.
    #[error(transparent)]
    Datagen(#[from] DatagenError),
}

/// Parameters of the propagation model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorPropParams {
    /// Heating sensitivity α, MSCM/°C.
    pub alpha: f64,
    /// `P(T < 18°)`.
    pub p_cold: f64,
    /// Temperature forecast error variance σ²ε, °C².
    pub sigma2_eps: f64,
    /// Temperature-free forecast variance σ₀², MSCM².
    pub sigma2_0: f64,
}

impl ErrorPropParams {
    /// Validated constructor.
    pub fn new(alpha: f64, p_cold: f64, sigma2_eps: f64, sigma2_0: f64) -> Result<Self, ErrorPropError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(ErrorPropError::InvalidParams("alpha must be positive"));
        }
        if !(0.0..=1.0).contains(&p_cold) {
            return Err(ErrorPropError::InvalidParams("p_cold must lie in [0, 1]"));
        }
        if !(sigma2_eps >= 0.0) || !sigma2_eps.is_finite() {
            return Err(ErrorPropError::InvalidParams("sigma2_eps must be >= 0"));
        }
        if !(sigma2_0 >= 0.0) || !sigma2_0.is_finite() {
            return Err(ErrorPropError::InvalidParams("sigma2_0 must be >= 0"));
        }
        Ok(Self { alpha, p_cold, sigma2_eps, sigma2_0 })
    }

    /// Same parameters with a different σ₀².
    pub fn with_sigma2_0(self, sigma2_0: f64) -> Result<Self, ErrorPropError> {
        Self::new(self.alpha, self.p_cold, self.sigma2_eps, sigma2_0)
    }

    /// `√(P·α²·σ²ε)`, the RMSE floor induced by temperature error.
    pub fn performance_limit(&self) -> f64 {
        math::sqrt(self.p_cold * self.alpha * self.alpha * self.sigma2_eps)
    }

    /// `√(σ₀² + P·α²·σ²ε)`.
    pub fn predicted_rmse(&self) -> f64 {
        predicted_rmse(self.sigma2_0, self)
    }

    /// `σ₀² / (P·α²)`: σ²ε below this leaves the RMSE nearly unchanged.
    pub fn negligibility_threshold(&self) -> Result<f64, ErrorPropError> {
        negligibility_threshold(self.sigma2_0, self)
    }
}

/// `√(P·α²·σ²ε)`.
pub fn performance_limit(params: &ErrorPropParams) -> f64 {
    params.performance_limit()
}

/// `√(σ₀² + P·α²·σ²ε)` for an explicit σ₀².
pub fn predicted_rmse(sigma2_0: f64, params: &ErrorPropParams) -> f64 {
    math::sqrt(sigma2_0 + params.p_cold * params.alpha * params.alpha * params.sigma2_eps)
}

/// `σ₀² / (P·α²)`.
pub fn negligibility_threshold(sigma2_0: f64, params: &ErrorPropParams) -> Result<f64, ErrorPropError> {
    let den = params.p_cold * params.alpha * params.alpha;
    if den == 0.0 {
        return Err(ErrorPropError::ZeroDenominator);
    }
    Ok(sigma2_0 / den)
}

/// Share of a measured MSE attributable to temperature error,
/// `(MSE − σ₀²) / MSE`.
pub fn temperature_share(sigma2_0: f64, total_mse: f64) -> Result<f64, ErrorPropError> {
    if total_mse == 0.0 {
        return Err(ErrorPropError::ZeroDenominator);
    }
    Ok((total_mse - sigma2_0) / total_mse)
}

/// Estimate α, `P(T<18°)` and σ²ε from records carrying both temperatures.
///
/// α is the least-squares slope of demand on `HDD(T)` with an intercept;
/// the cold fraction and the slope use the recorded temperature.
pub fn estimate_params(records: &[DailyRecord], sigma2_0: f64) -> Result<ErrorPropParams, ErrorPropError> {
    if records.is_empty() {
        return Err(ErrorPropError::Empty);
    }
    let mut temps = Vec::with_capacity(records.len());
    for r in records {
        temps.push(r.temp_actual.ok_or(ErrorPropError::MissingActualTemperature(r.date))?);
    }
    let n = records.len() as f64;
    let cold = temps.iter().filter(|t| **t < HDD_BASE).count();
    if cold == 0 {
        return Err(ErrorPropError::NoColdDays);
    }
    let h: Vec<f64> = temps.iter().map(|t| hdd(*t)).collect();
    let y: Vec<f64> = records.iter().map(|r| r.rgd).collect();
    let (mh, my) = (math::mean(&h), math::mean(&y));
    let sxy: f64 = h.iter().zip(&y).map(|(a, b)| (a - mh) * (b - my)).sum();
    let sxx: f64 = h.iter().map(|a| (a - mh) * (a - mh)).sum();
    if sxx == 0.0 {
        return Err(ErrorPropError::NoColdDays);
    }
    let errors: Vec<f64> = records.iter().zip(&temps).map(|(r, t)| r.temp_forecast - t).collect();
    let sigma2_eps = if errors.len() > 1 { math::sample_variance(&errors) } else { 0.0 };
    ErrorPropParams::new(sxy / sxx, cold as f64 / n, sigma2_eps, sigma2_0)
}

/// One point of the gas-RMSE versus temperature-RMSE curve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    /// Temperature error variance σ²ε, °C².
    pub sigma2_eps: f64,
    /// Temperature RMSE σε, °C.
    pub temperature_rmse: f64,
    /// Predicted gas RMSE, MSCM.
    pub gas_rmse: f64,
}

/// Predicted RMSE at `steps` evenly spaced σ²ε values in `[min, max]`.
pub fn rmse_curve(sigma2_0: f64, params: &ErrorPropParams, min: f64, max: f64, steps: usize) -> Result<Vec<CurvePoint>, ErrorPropError> {
    if steps == 0 || !(min >= 0.0) || !(max >= min) || !max.is_finite() {
        return Err(ErrorPropError::InvalidParams("curve range must satisfy 0 <= min <= max with steps >= 1"));
    }
    Ok((0..steps)
        .map(|i| {
            let s = if steps == 1 { min } else { min + (max - min) * i as f64 / (steps - 1) as f64 };
            let p = ErrorPropParams { sigma2_eps: s, ..*params };
            CurvePoint { sigma2_eps: s, temperature_rmse: math::sqrt(s), gas_rmse: predicted_rmse(sigma2_0, &p) }
        })
        .collect())
}

/// Outcome of a simulated forecasting experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarloOutcome {
    /// Ground-truth parameters (`p_cold` is the simulated cold fraction).
    pub params: ErrorPropParams,
    /// RMSE of the simulated forecasts.
    pub empirical_rmse: f64,
    /// [`predicted_rmse`] at the ground truth.
    pub predicted_rmse: f64,
    /// `|empirical − predicted| / predicted`.
    pub relative_gap: f64,
}

/// Simulate an idealized forecaster that knows `ḡ(x)` up to noise of
/// variance σ₀² and sees temperature through `T̂ = T + ε`.
///
/// Temperatures follow the generator's climate process; the forecast error is
/// `α·(HDD(T̂) − HDD(T)) + e₀`, `e₀ ~ N(0, σ₀²)`.
pub fn monte_carlo_validate(config: &GeneratorConfig, n_days: usize, seed: u64) -> Result<MonteCarloOutcome, ErrorPropError> {
    config.validate()?;
    if n_days == 0 {
        return Err(ErrorPropError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let temps = simulate_temperatures(config, config.start, n_days, &mut rng);
    let mut sse = 0.0;
    let mut cold = 0usize;
    for (actual, forecast) in &temps {
        if *actual < HDD_BASE {
            cold += 1;
        }
        let e0: f64 = config.sigma0 * rng.sample::<f64, _>(StandardNormal);
        let err = config.alpha * (hdd(*forecast) - hdd(*actual)) + e0;
        sse += err * err;
    }
    let empirical_rmse = math::sqrt(sse / n_days as f64);
    let params = ErrorPropParams {
        alpha: config.alpha,
        p_cold: cold as f64 / n_days as f64,
        sigma2_eps: config.sigma_eps * config.sigma_eps,
        sigma2_0: config.sigma0 * config.sigma0,
    };
    let predicted = params.predicted_rmse();
    let relative_gap = if predicted > 0.0 { math::abs(empirical_rmse - predicted) / predicted } else { empirical_rmse };
    Ok(MonteCarloOutcome { params, empirical_rmse, predicted_rmse: predicted, relative_gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_case_and_zero_error() {
        assert_eq!(ErrorPropParams::new(1.0, 1.0, 4.0, 0.0).unwrap().performance_limit(), 2.0);
        assert_eq!(ErrorPropParams::new(10.56, 0.63, 0.0, 1.0).unwrap().performance_limit(), 0.0);
    }

    #[test]
    fn reduction_at_zero_sigma0() {
        let p = ErrorPropParams::new(10.56, 0.63, 0.063, 0.0).unwrap();
        assert_eq!(p.predicted_rmse(), p.performance_limit());
        assert_eq!(p.negligibility_threshold().unwrap(), 0.0);
    }

    #[test]
    fn threshold_is_linear_and_guarded() {
        let p = ErrorPropParams::new(10.56, 0.63, 0.063, 13.31).unwrap();
        let a = negligibility_threshold(13.31, &p).unwrap();
        let b = negligibility_threshold(26.62, &p).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-15);
        let warm = ErrorPropParams::new(10.56, 0.0, 0.063, 13.31).unwrap();
        assert_eq!(warm.negligibility_threshold(), Err(ErrorPropError::ZeroDenominator));
    }

    #[test]
    fn validation() {
        assert!(ErrorPropParams::new(0.0, 0.5, 0.1, 1.0).is_err());
        assert!(ErrorPropParams::new(1.0, 1.5, 0.1, 1.0).is_err());
        assert!(ErrorPropParams::new(1.0, 0.5, -0.1, 1.0).is_err());
    }

    #[test]
    fn curve_starts_at_sigma0_and_rises() {
        let p = ErrorPropParams::new(10.56, 0.63, 0.063, 13.31).unwrap();
        let c = rmse_curve(13.31, &p, 0.0, 4.0, 41).unwrap();
        assert_eq!(c[0].gas_rmse, math::sqrt(13.31));
        assert!(c.windows(2).all(|w| w[1].gas_rmse >= w[0].gas_rmse));
    }
}
