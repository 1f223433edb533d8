//! Error type shared by every physics and numerics routine.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine did not reach its target accuracy.
    #[error("numerical error: {message} (best estimate {estimate:e}, error estimate {error:e})")]
    Numerical {
        message: String,
        estimate: f64,
        error: f64,
    },

    /// A peak search was handed a function with no usable variation.
    #[error("degenerate peak: {0}")]
    DegeneratePeak(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, estimate: f64, error: f64) -> Self {
        Error::Numerical {
            message: msg.into(),
            estimate,
            error,
        }
    }
}
