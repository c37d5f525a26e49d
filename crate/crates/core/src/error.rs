use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("base inertia estimate {value} is not positive (tolerance {tolerance})")]
    NonpositiveBaseInertia { value: f64, tolerance: f64 },

    #[error("coupled inertia row is rank deficient (norm {norm:.3e} <= {tolerance:.3e})")]
    RankDeficientCoupling { norm: f64, tolerance: f64 },

    #[error("dynamic singularity: smallest singular value of Jm*T is {sigma_min:.3e} (threshold {threshold:.3e})")]
    DynamicSingularity { sigma_min: f64, threshold: f64 },

    #[error("numerical divergence at t = {t} s")]
    NumericalDivergence { t: f64 },

    #[error("invalid gains: {0}")]
    InvalidGains(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("simulation failed at t = {t} s: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips any `AtTime` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
