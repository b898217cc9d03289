//! TOML configuration files.
//!
//! A generator file holds [`GeneratorConfig`] keys at top level; dates are
//! quoted strings:
//!
//! ```toml
//! start = "2007-01-01"
//! end = "2017-12-31"
//! alpha = 10.5
//! seed = 7
//! ```
//!
//! A run file sets backtest defaults that command-line flags override, plus
//! the tuning grids under `[grids]`:
//!
//! ```toml
//! data = "demand.csv"
//! models = ["ridge", "torus"]
//! test_years = [2016, 2017]
//! temperature = "both"
//!
//! [grids]
//! ridge_lambdas = [0.0001, 0.01, 1.0]
//! knn_k = [5, 10, 20]
//! ```

use std::path::{Path, PathBuf};

use gasdemand_core::backtest::TuningGrids;
use gasdemand_core::datagen::GeneratorConfig;
use serde::Deserialize;

/// Config loading failures.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// The file could not be read.
    #[error("cannot read {path}: {source}")]
    Io {
        /// File.
        path: PathBuf,
        /// Cause.
        source: std::io::Error,
    },
    /// The file is not valid for its schema.
    #[error("invalid config {path}: {source}")]
    Parse {
        /// File.
        path: PathBuf,
        /// Cause.
        source: toml::de::Error,
    },
    /// Parsed but semantically invalid.
    #[error("invalid config {path}: {message}")]
    Invalid {
        /// File.
        path: PathBuf,
        /// Description.
        message: String,
    },
}

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    toml::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
}

/// Read and validate a generator config.
pub fn load_generator(path: &Path) -> Result<GeneratorConfig, ConfigError> {
    let config: GeneratorConfig = load(path)?;
    config
        .validate()
        .map_err(|e| ConfigError::Invalid { path: path.into(), message: e.to_string() })?;
    Ok(config)
}

/// Backtest defaults from a run file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input CSV.
    pub data: Option<PathBuf>,
    /// Output directory.
    pub out_dir: Option<PathBuf>,
    /// Model names.
    pub models: Option<Vec<String>>,
    /// `actual`, `forecast` or `both`.
    pub temperature: Option<String>,
    /// Test years.
    pub test_years: Option<Vec<i32>>,
    /// MLP seed.
    pub seed: Option<u64>,
    /// Tuning grids.
    pub grids: TuningGrids,
}

/// Read a run config.
pub fn load_run(path: &Path) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = load(path)?;
    let g = &config.grids;
    let empty = [
        ("ridge_lambdas", g.ridge_lambdas.is_empty()),
        ("knn_k", g.knn_k.is_empty()),
        ("knn_weightings", g.knn_weightings.is_empty()),
        ("gp_nu", g.gp_nu.is_empty()),
        ("gp_length_scales", g.gp_length_scales.is_empty()),
        ("gp_noise_variances", g.gp_noise_variances.is_empty()),
        ("mlp_learning_rates", g.mlp_learning_rates.is_empty()),
        ("mlp_batch_sizes", g.mlp_batch_sizes.is_empty()),
        ("torus_n_yearly", g.torus_n_yearly.is_empty()),
        ("torus_n_weekly", g.torus_n_weekly.is_empty()),
    ];
    if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
        return Err(ConfigError::Invalid { path: path.into(), message: format!("grid `{name}` is empty") });
    }
    if g.folds < 2 {
        return Err(ConfigError::Invalid { path: path.into(), message: "folds must be at least 2".into() });
    }
    Ok(config)
}
