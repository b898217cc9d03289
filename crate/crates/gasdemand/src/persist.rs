//! Versioned JSON model files.
//!
//! A file is an envelope `{"format", "version", "kind", "forecaster"}` where
//! the forecaster carries hyperparameters, scaler, calendar and fitted state.

use std::io::{Read, Write};

use gasdemand_core::models::{Forecaster, ModelKind};
use serde::{Deserialize, Serialize};

/// Envelope `format` tag.
pub const FORMAT: &str = "gasdemand-model";
/// Current envelope version.
pub const VERSION: u32 = 1;

/// Persistence failures.
#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    /// JSON or IO failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// Wrong format tag or version.
    #[error("not a supported model file (format `{format}`, version {version})")]
    Unsupported {
        /// Found format.
        format: String,
        /// Found version.
        version: u32,
    },
    /// Envelope kind disagrees with its payload.
    #[error("envelope says {envelope} but holds a {payload} model")]
    KindMismatch {
        /// Declared kind.
        envelope: ModelKind,
        /// Actual kind.
        payload: ModelKind,
    },
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    kind: ModelKind,
    forecaster: Forecaster,
}

/// Serialize a fitted forecaster.
pub fn save<W: Write>(output: W, forecaster: &Forecaster) -> Result<(), PersistError> {
    let env = Envelope {
        format: FORMAT.into(),
        version: VERSION,
        kind: forecaster.kind(),
        forecaster: forecaster.clone(),
    };
    serde_json::to_writer(output, &env)?;
    Ok(())
}

/// Load a forecaster saved by [`save`].
pub fn load<R: Read>(input: R) -> Result<Forecaster, PersistError> {
    let env: Envelope = serde_json::from_reader(input)?;
    if env.format != FORMAT || env.version != VERSION {
        return Err(PersistError::Unsupported { format: env.format, version: env.version });
    }
    if env.kind != env.forecaster.kind() {
        return Err(PersistError::KindMismatch { envelope: env.kind, payload: env.forecaster.kind() });
    }
    Ok(env.forecaster)
}
