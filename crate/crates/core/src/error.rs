use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solvers, checks and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("level {level} is outside the range [{low}, {high}] of the monotone function")]
    OutOfRange { level: f64, low: f64, high: f64 },

    #[error("negative weight {weight} in cell {cell}")]
    NegativeWeight { cell: usize, weight: f64 },

    #[error("invalid Eulerian state: {0}")]
    InvalidState(String),

    #[error("state has zero energy; the quantity is undefined")]
    ZeroEnergy,

    #[error("incompatible Lagrangian triple: {0}")]
    IncompatibleTriple(String),

    #[error("degenerate cell {cell}: y_xi + H_xi = {slope}")]
    DegenerateCell { cell: usize, slope: f64 },

    #[error("measure has zero total mass; nothing to parametrize")]
    EmptyMeasure,

    #[error("time step {dt} too large: {reason}")]
    StepTooLarge { dt: f64, reason: String },

    #[error("negative mass {mass} in cell {cell}; the grid is too coarse")]
    NegativeMass { cell: usize, mass: f64 },

    #[error("test function support exceeds the trajectory: {0}")]
    SupportExceeded(String),

    #[error("no snapshot at time {0}")]
    MissingTime(f64),

    #[error("trajectories do not share output times: {0}")]
    MismatchedTimes(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
