//! Gaussian process regression with isotropic half-integer Matérn kernels.
//!
//! The prior is zero-mean on standardized targets; the prediction is the
//! posterior mean `Σᵢ cᵢ κ(x*, xᵢ)` with `c = (Σ + σ²I)⁻¹ y`.

use alloc::vec::Vec;

use super::ModelError;
use crate::features::FeatureMatrix;
use crate::linalg::{squared_distance, Cholesky, Matrix};
use crate::math;

/// Matérn smoothness with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub enum MaternNu {
    /// ν = 1/2, the exponential kernel.
    Half,
    /// ν = 3/2.
    ThreeHalves,
    /// ν = 5/2.
    FiveHalves,
}

impl MaternNu {
    /// Numeric ν.
    pub fn value(self) -> f64 {
        match self {
            MaternNu::Half => 0.5,
            MaternNu::ThreeHalves => 1.5,
            MaternNu::FiveHalves => 2.5,
        }
    }
}

impl TryFrom<f64> for MaternNu {
    type Error = ModelError;
    fn try_from(nu: f64) -> Result<Self, ModelError> {
        if nu == 0.5 {
            Ok(MaternNu::Half)
        } else if nu == 1.5 {
            Ok(MaternNu::ThreeHalves)
        } else if nu == 2.5 {
            Ok(MaternNu::FiveHalves)
        } else {
            Err(ModelError::UnsupportedNu(nu))
        }
    }
}

impl From<MaternNu> for f64 {
    fn from(nu: MaternNu) -> f64 {
        nu.value()
    }
}

impl core::fmt::Display for MaternNu {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Kernel and noise hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GpParams {
    /// Smoothness ν.
    pub nu: MaternNu,
    /// Length-scale l.
    pub length_scale: f64,
    /// Observation noise variance σ².
    pub noise_variance: f64,
}

impl GpParams {
    /// Validated constructor.
    pub fn new(nu: f64, length_scale: f64, noise_variance: f64) -> Result<Self, ModelError> {
        let nu = MaternNu::try_from(nu)?;
        if !(length_scale > 0.0) || !length_scale.is_finite() {
            return Err(ModelError::InvalidHyperparameter("GP length-scale must be > 0"));
        }
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(ModelError::InvalidHyperparameter("GP noise variance must be >= 0"));
        }
        Ok(Self { nu, length_scale, noise_variance })
    }
}

/// Matérn covariance at distance `r` for ν ∈ {0.5, 1.5, 2.5}.
pub fn matern_kernel(r: f64, nu: f64, length_scale: f64) -> Result<f64, ModelError> {
    let nu = MaternNu::try_from(nu)?;
    if !(length_scale > 0.0) {
        return Err(ModelError::InvalidHyperparameter("GP length-scale must be > 0"));
    }
    if !(r >= 0.0) {
        return Err(ModelError::InvalidHyperparameter("distance must be >= 0"));
    }
    Ok(matern(nu, r / length_scale))
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

/// Kernel at scaled distance `s = r / l`.
#[inline]
fn matern(nu: MaternNu, s: f64) -> f64 {
    match nu {
        MaternNu::Half => math::exp(-s),
        MaternNu::ThreeHalves => {
            let a = SQRT_3 * s;
            (1.0 + a) * math::exp(-a)
        }
        MaternNu::FiveHalves => {
            let a = SQRT_5 * s;
            (1.0 + a + a * a / 3.0) * math::exp(-a)
        }
    }
}

/// Gram matrix `Σ(x)` of the kernel over the rows of `x`.
pub fn gram_matrix(x: &Matrix, params: &GpParams) -> Matrix {
    let n = x.rows();
    let inv_l = 1.0 / params.length_scale;
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let s = math::sqrt(squared_distance(x.row(i), x.row(j))) * inv_l;
            let v = matern(params.nu, s);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Factor `Σ + σ²I`, retrying once with a small diagonal jitter.
fn factor_covariance(x: &Matrix, params: &GpParams) -> Result<Cholesky, ModelError> {
    let mut k = gram_matrix(x, params);
    k.add_diagonal(params.noise_variance);
    match Cholesky::factor(k.clone()) {
        Ok(ch) => Ok(ch),
        Err(_) => {
            let jitter = 1e-10 * k.mean_diagonal();
            k.add_diagonal(jitter);
            Cholesky::factor(k).map_err(|_| ModelError::NotPositiveDefinite)
        }
    }
}

/// Posterior-mean weights `c = (Σ + σ²I)⁻¹ y` for targets taken as given.
pub fn posterior_weights(x: &Matrix, y: &[f64], params: &GpParams) -> Result<Vec<f64>, ModelError> {
    if x.rows() != y.len() {
        return Err(ModelError::LengthMismatch { rows: x.rows(), targets: y.len() });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    Ok(factor_covariance(x, params)?.solve(y))
}

/// Zero-mean Gaussian log marginal likelihood of `y` under the prior.
///
/// `−½ yᵀ(Σ+σ²I)⁻¹y − ½ ln det(Σ+σ²I) − (n/2) ln 2π`
pub fn log_marginal_likelihood(x: &Matrix, y: &[f64], params: &GpParams) -> Result<f64, ModelError> {
    if x.rows() != y.len() {
        return Err(ModelError::LengthMismatch { rows: x.rows(), targets: y.len() });
    }
    if y.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let ch = factor_covariance(x, params)?;
    let mut z = y.to_vec();
    ch.forward_substitute(&mut z);
    let quad: f64 = z.iter().map(|v| v * v).sum();
    let n = y.len() as f64;
    Ok(-0.5 * quad - 0.5 * ch.log_determinant() - 0.5 * n * math::LN_2PI)
}

/// Log marginal likelihood of a feature matrix, on standardized targets.
pub fn gp_log_marginal_likelihood(fm: &FeatureMatrix, params: &GpParams) -> Result<f64, ModelError> {
    let (mean, std) = target_moments(&fm.y);
    let z: Vec<f64> = fm.y.iter().map(|v| (v - mean) / std).collect();
    log_marginal_likelihood(&fm.x, &z, params)
}

fn target_moments(y: &[f64]) -> (f64, f64) {
    let mean = math::mean(y);
    let std = math::sqrt(math::variance(y));
    (mean, if std > 0.0 { std } else { 1.0 })
}

/// Fitted GP regressor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GpModel {
    /// Hyperparameters.
    pub params: GpParams,
    /// Training inputs.
    pub train_x: Matrix,
    /// Posterior-mean weights on the standardized target scale.
    pub weights: Vec<f64>,
    /// Target mean removed before fitting.
    pub target_mean: f64,
    /// Target scale divided out before fitting.
    pub target_std: f64,
}

impl GpModel {
    /// Fit with targets standardized to zero mean and unit variance.
    pub fn fit(x: &Matrix, y: &[f64], params: GpParams) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let (mean, std) = target_moments(y);
        let z: Vec<f64> = y.iter().map(|v| (v - mean) / std).collect();
        let weights = posterior_weights(x, &z, &params)?;
        Ok(Self { params, train_x: x.clone(), weights, target_mean: mean, target_std: std })
    }

    /// Fit on targets as given, with the zero-mean prior applied directly.
    pub fn fit_zero_mean(x: &Matrix, y: &[f64], params: GpParams) -> Result<Self, ModelError> {
        let weights = posterior_weights(x, y, &params)?;
        Ok(Self { params, train_x: x.clone(), weights, target_mean: 0.0, target_std: 1.0 })
    }

    /// Posterior mean at `row`, in target units.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let inv_l = 1.0 / self.params.length_scale;
        let z: f64 = self
            .train_x
            .iter_rows()
            .zip(&self.weights)
            .map(|(xi, c)| c * matern(self.params.nu, math::sqrt(squared_distance(row, xi)) * inv_l))
            .sum();
        self.target_mean + self.target_std * z
    }
}
