use thiserror::Error;

/// Errors produced by the numerical routines and the config layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Noisy-channel routines require zero-mean, unit-variance priors.
    #[error("prior is not standardized (mean {mean}, variance {variance}); call `standardize` first")]
    NotStandardized { mean: f64, variance: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error}, tolerance {tolerance}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("no sign change of the fixed-point residual was found on the scan grid")]
    NoRoot,

    #[error("inequality cannot be satisfied: {0}")]
    Unsatisfiable(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
