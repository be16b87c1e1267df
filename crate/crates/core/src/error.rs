//! Crate-wide error type.

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two fields (or a field and a metric) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// An explicit step was requested beyond the parabolic stability bound.
    #[error("CFL violation at t = {time}: dt = {dt:.6e} exceeds stable limit {limit:.6e}")]
    CflViolation { time: f64, dt: f64, limit: f64 },

    /// The shrinking sphere was evaluated at or past its extinction time.
    #[error("sphere extinction reached at t = {0}")]
    ExtinctionReached(f64),

    /// An amplitude or density fell below the node floor; the operation is refused
    /// rather than regularized.
    #[error("amplitude below node floor {floor:.1e} (min {min:.6e} at index {index})")]
    NodeEncountered { index: usize, min: f64, floor: f64 },

    /// A density that must be strictly positive is not.
    #[error("density must be strictly positive (min {min:.6e} at index {index})")]
    NonPositiveDensity { index: usize, min: f64 },

    /// Sphere radius must be positive.
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    /// A time series is too short for the requested stencil.
    #[error("too few steps: got {got}, need at least {need}")]
    TooFewSteps { got: usize, need: usize },

    /// An experiment configuration failed validation before any compute.
    #[error("invalid config key `{key}`: {reason}")]
    ConfigInvalid { key: String, reason: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
