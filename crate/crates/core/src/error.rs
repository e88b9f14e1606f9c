use std::path::PathBuf;

use crate::spectral::Representation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("representation mismatch: expected {expected:?} field, found {found:?}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input to the periodic antiderivative is not in the range of the
    /// derivative.
    #[error(
        "field mean {mean:e} is not zero (L2 norm {norm:e}); no periodic antiderivative exists"
    )]
    NonZeroMean { mean: f64, norm: f64 },

    #[error("non-finite value after {substep} in step {step}")]
    NonFinite { step: usize, substep: &'static str },

    #[error("trajectory: {0}")]
    Trajectory(String),

    #[error("duhamel cadence check failed: residual changed by {relative_change:.3} (limit {limit}) when the cadence was halved")]
    Cadence { relative_change: f64, limit: f64 },

    #[error("{location}: {message}")]
    Config { location: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
                | Error::Config { .. }
                | Error::NonZeroMean { .. }
                | Error::Format { .. }
        ) || matches!(self, Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound)
    }
}
