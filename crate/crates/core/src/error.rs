use thiserror::Error;

/// Errors produced by the simulation, reconstruction and analysis routines.
#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("wavenumber ({kx}, {ky}) lies outside the steerable disk of radius {limit}")]
    OutsideSteerableDisk { kx: f64, ky: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("steering angle {theta} rad is too close to grazing incidence")]
    GrazingAngle { theta: f64 },

    #[error("wavenumber grid is not uniformly spaced (sample {index})")]
    NonUniformGrid { index: usize },

    #[error("echo kind {actual} cannot be used here; expected {expected}")]
    WrongEchoKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("profile has no strict global maximum")]
    NoStrictPeak,

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("look angle {theta} rad exceeds the steering limit {limit} rad")]
    BeyondSteeringLimit { theta: f64, limit: f64 },

    #[error("config key `{key}`: {message}")]
    ConfigKey { key: String, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ImagingError>;
