use thiserror::Error;

use crate::volio::mrc::MrcError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis specs differ between expansions")]
    SpecMismatch,

    #[error("volume sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),

    /// The Euler chart is singular at the current rotation (beta near 0 or pi).
    #[error("rotation too close to gimbal lock (beta = {beta})")]
    GimbalLock { beta: f64 },

    #[error("zero total energy")]
    ZeroEnergy,

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error(transparent)]
    Mrc(#[from] MrcError),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
