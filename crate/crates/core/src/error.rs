//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by geometry, model setup, time stepping and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A point was queried outside the closed domain.
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    /// A point is too far from the boundary for its nearest boundary point to be unique.
    #[error("point at distance {distance} is outside the boundary collar of width {kappa}")]
    OutsideCollar { distance: f64, kappa: f64 },

    /// A parameter is out of its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An energy model fails one of its structural requirements.
    #[error("invalid energy model: {0}")]
    Model(String),

    /// The time step could not be completed even after repeated halving.
    #[error("time step failed at t = {time}: {reason}")]
    Step { time: f64, reason: String },

    /// The implicit linear system could not be solved.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// A configuration file failed to parse or validate.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// A checkpoint file is malformed or does not match the run.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// The grid or snapshot cadence is too coarse for the requested measurement.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// A hypothesis of the requested check does not hold for this run.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
