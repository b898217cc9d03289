//! Day-ahead residential gas demand forecasting.
//!
//! This crate holds the allocation-only numerical core: the civil calendar
//! with the Italian holiday list and similar-day mapping, the 21-covariate
//! feature builder, five predictors (ridge, Gaussian process, KNN, MLP and
//! the torus harmonic model), hyperparameter tuning, error metrics and
//! spectral diagnostics, the temperature-error propagation model, an
//! expanding-window backtest and a seeded synthetic data generator.
//!
//! Nothing here touches the filesystem; CSV, configuration files, plots and
//! the command-line tool live in the `gasdemand` crate.
//!
//! # Example
//!
//! ```
//! use gasdemand_core::errorprop::ErrorPropParams;
//!
//! let params = ErrorPropParams::new(10.56, 0.63, 0.063, 3.65 * 3.65).unwrap();
//! let limit = params.performance_limit();
//! assert!((limit - 2.104).abs() < 1e-3);
//! ```
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_docs)]

extern crate alloc;
#[cfg(all(feature = "std", not(test)))]
extern crate std;

pub mod backtest;
pub mod calendar;
pub mod datagen;
pub mod errorprop;
pub mod features;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod tuning;

mod math;

pub use calendar::{CivilDate, HolidayCalendar, Weekday};
pub use features::{Dataset, DailyRecord, FeatureMatrix, TemperatureSource};
pub use models::{FittedModel, Hyperparams, ModelKind};
