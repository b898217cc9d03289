//! The five predictors behind one fit/predict contract.
//!
//! Ridge, GP, KNN and MLP consume standardized [`FeatureMatrix`] rows; the
//! torus model regresses log demand directly on calendar time. A
//! [`Forecaster`] pairs a fitted model with the scaler and temperature
//! source it was trained with, so a day-ahead prediction only needs the
//! dataset and the target date.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::calendar::{CivilDate, HolidayCalendar};
use crate::features::{self, Dataset, FeatureError, FeatureMatrix, Scaler, TemperatureSource};
use crate::linalg::LinalgError;

pub mod gp;
pub mod knn;
pub mod mlp;
pub mod ridge;
pub mod torus;

pub use gp::{GpModel, GpParams, MaternNu};
pub use knn::{KnnModel, Weighting};
pub use mlp::{MlpConfig, MlpModel};
pub use ridge::RidgeModel;
pub use torus::TorusModel;

/// Errors raised by model fitting and prediction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    /// The ridge normal equations are singular (λ = 0 on a rank-deficient design).
    #[error("normal equations are singular")]
    SingularSystem,
    /// The GP covariance stayed indefinite after jitter.
    #[error("covariance matrix is not positive definite even after jitter")]
    NotPositiveDefinite,
    /// Matérn smoothness outside {0.5, 1.5, 2.5}.
    #[error("unsupported Matérn smoothness ν = {0}")]
    UnsupportedNu(f64),
    /// No training rows.
    #[error("empty training set")]
    EmptyTrainingSet,
    /// KNN neighbour count outside 1..=n.
    #[error("K = {k} is outside 1..={n}")]
    InvalidK {
        /// Requested neighbours.
        k: usize,
        /// Training rows.
        n: usize,
    },
    /// MLP training diverged.
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss {
        /// Epoch at which divergence was detected.
        epoch: usize,
    },
    /// The torus model needs strictly positive demand.
    #[error("demand on {0} is not strictly positive")]
    NonPositiveDemand(CivilDate),
    /// A hyperparameter is outside its domain.
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
    /// Inputs and targets disagree in length.
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch {
        /// Design rows.
        rows: usize,
        /// Target count.
        targets: usize,
    },
    /// A model of one kind was asked to do another kind's job.
    #[error("operation not available for the {0} model")]
    WrongKind(ModelKind),
    /// Feature assembly failed.
    #[error(transparent)]
    Feature(#[from] FeatureError),
    /// Least squares failed.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The five model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    /// Ridge regression.
    Ridge,
    /// Gaussian process with a Matérn kernel.
    Gp,
    /// K-nearest neighbours.
    Knn,
    /// Multilayer perceptron.
    Mlp,
    /// Torus harmonic model on log demand.
    Torus,
}

impl ModelKind {
    /// All kinds in report order.
    pub const ALL: [ModelKind; 5] = [ModelKind::Ridge, ModelKind::Gp, ModelKind::Knn, ModelKind::Torus, ModelKind::Mlp];

    /// Lower-case name as used on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ridge => "ridge",
            ModelKind::Gp => "gp",
            ModelKind::Knn => "knn",
            ModelKind::Mlp => "mlp",
            ModelKind::Torus => "torus",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unknown model name.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown model `{0}` (expected ridge, gp, knn, mlp or torus)")]
pub struct UnknownModel(pub String);

impl FromStr for ModelKind {
    type Err = UnknownModel;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ridge" => Ok(ModelKind::Ridge),
            "gp" => Ok(ModelKind::Gp),
            "knn" => Ok(ModelKind::Knn),
            "mlp" | "ann" => Ok(ModelKind::Mlp),
            "torus" => Ok(ModelKind::Torus),
            other => Err(UnknownModel(other.into())),
        }
    }
}

/// A complete hyperparameter setting for one model kind.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum Hyperparams {
    /// Regularization weight.
    Ridge {
        /// λ ≥ 0.
        lambda: f64,
    },
    /// Kernel and noise.
    Gp(GpParams),
    /// Neighbour count and weighting.
    Knn {
        /// K.
        k: usize,
        /// Averaging rule.
        weighting: Weighting,
    },
    /// Network and optimizer settings.
    Mlp(MlpConfig),
    /// Harmonic counts.
    Torus {
        /// Yearly harmonics.
        n_yearly: usize,
        /// Weekly harmonics.
        n_weekly: usize,
    },
}

impl Hyperparams {
    /// Kind this setting belongs to.
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::Ridge { .. } => ModelKind::Ridge,
            Hyperparams::Gp(_) => ModelKind::Gp,
            Hyperparams::Knn { .. } => ModelKind::Knn,
            Hyperparams::Mlp(_) => ModelKind::Mlp,
            Hyperparams::Torus { .. } => ModelKind::Torus,
        }
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparams::Ridge { lambda } => write!(f, "lambda={lambda}"),
            Hyperparams::Gp(p) => write!(f, "nu={} l={} sigma2={}", p.nu.value(), p.length_scale, p.noise_variance),
            Hyperparams::Knn { k, weighting } => write!(f, "k={k} weighting={}", weighting.as_str()),
            Hyperparams::Mlp(c) => write!(f, "lr={} batch={} epochs={}", c.learning_rate, c.batch_size, c.epochs),
            Hyperparams::Torus { n_yearly, n_weekly } => write!(f, "n_d={n_yearly} n_w={n_weekly}"),
        }
    }
}

/// A fitted model of any kind.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", content = "state", rename_all = "lowercase"))]
pub enum FittedModel {
    /// Ridge.
    Ridge(RidgeModel),
    /// Gaussian process.
    Gp(GpModel),
    /// KNN.
    Knn(KnnModel),
    /// MLP.
    Mlp(MlpModel),
    /// Torus.
    Torus(TorusModel),
}

impl FittedModel {
    /// Kind of the fitted model.
    pub fn kind(&self) -> ModelKind {
        match self {
            FittedModel::Ridge(_) => ModelKind::Ridge,
            FittedModel::Gp(_) => ModelKind::Gp,
            FittedModel::Knn(_) => ModelKind::Knn,
            FittedModel::Mlp(_) => ModelKind::Mlp,
            FittedModel::Torus(_) => ModelKind::Torus,
        }
    }

    /// Fit a feature-based model on a standardized matrix.
    pub fn fit_features(params: &Hyperparams, fm: &FeatureMatrix) -> Result<Self, ModelError> {
        Ok(match params {
            Hyperparams::Ridge { lambda } => FittedModel::Ridge(ridge::ridge_fit(fm, *lambda)?),
            Hyperparams::Gp(p) => FittedModel::Gp(GpModel::fit(&fm.x, &fm.y, *p)?),
            Hyperparams::Knn { k, weighting } => FittedModel::Knn(KnnModel::fit(&fm.x, &fm.y, *k, *weighting)?),
            Hyperparams::Mlp(c) => FittedModel::Mlp(MlpModel::fit(&fm.x, &fm.y, c)?),
            Hyperparams::Torus { .. } => return Err(ModelError::WrongKind(ModelKind::Torus)),
        })
    }

    /// Predict from one standardized feature row (not available for torus).
    pub fn predict_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        Ok(match self {
            FittedModel::Ridge(m) => m.predict_row(row),
            FittedModel::Gp(m) => m.predict_row(row),
            FittedModel::Knn(m) => m.predict_row(row),
            FittedModel::Mlp(m) => m.predict_row(row),
            FittedModel::Torus(_) => return Err(ModelError::WrongKind(ModelKind::Torus)),
        })
    }
}

/// A fitted model together with everything needed to forecast a day.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Forecaster {
    /// Hyperparameters the model was fitted with.
    pub hyperparams: Hyperparams,
    /// Temperature column used for features.
    pub source: TemperatureSource,
    /// Feature scaler (identity for torus).
    pub scaler: Scaler,
    /// Holiday calendar.
    pub calendar: HolidayCalendar,
    /// The fitted model.
    pub model: FittedModel,
}

impl Forecaster {
    /// Fit on the dataset rows dated in `[from, to]`.
    pub fn fit(
        params: &Hyperparams,
        dataset: &Dataset,
        from: CivilDate,
        to: CivilDate,
        source: TemperatureSource,
        calendar: &HolidayCalendar,
    ) -> Result<Self, ModelError> {
        match params {
            Hyperparams::Torus { n_yearly, n_weekly } => {
                let model = torus::torus_fit(dataset, from, to, *n_yearly, *n_weekly, source, calendar)?;
                Ok(Self {
                    hyperparams: params.clone(),
                    source,
                    scaler: Scaler::identity(0),
                    calendar: calendar.clone(),
                    model: FittedModel::Torus(model),
                })
            }
            _ => {
                let fm = features::build_matrix(dataset, from, to, source, calendar)?;
                Self::fit_matrix(params, &fm, source, calendar)
            }
        }
    }

    /// Fit a feature-based model on an already built matrix.
    pub fn fit_matrix(
        params: &Hyperparams,
        fm: &FeatureMatrix,
        source: TemperatureSource,
        calendar: &HolidayCalendar,
    ) -> Result<Self, ModelError> {
        let model = FittedModel::fit_features(params, fm)?;
        Ok(Self { hyperparams: params.clone(), source, scaler: fm.scaler.clone(), calendar: calendar.clone(), model })
    }

    /// Wrap an already fitted torus model.
    pub fn from_torus(model: TorusModel, calendar: &HolidayCalendar) -> Self {
        Self {
            hyperparams: Hyperparams::Torus { n_yearly: model.n_yearly, n_weekly: model.n_weekly },
            source: model.source,
            scaler: Scaler::identity(0),
            calendar: calendar.clone(),
            model: FittedModel::Torus(model),
        }
    }

    /// Kind of the wrapped model.
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    /// Day-ahead forecast of demand on `t` in MSCM.
    ///
    /// Reads only records dated `t` (temperature) and earlier (demand lags).
    pub fn predict_day(&self, dataset: &Dataset, t: CivilDate) -> Result<f64, ModelError> {
        match &self.model {
            FittedModel::Torus(m) => {
                let prev = dataset
                    .get(t.pred())
                    .ok_or(FeatureError::MissingLag { date: t, needed: t.pred() })?;
                m.predict(dataset, t, prev.rgd)
            }
            other => {
                let mut row = features::build_row(dataset, t, self.source, &self.calendar)?.0;
                self.scaler.standardize(&mut row);
                other.predict_row(&row)
            }
        }
    }
}
