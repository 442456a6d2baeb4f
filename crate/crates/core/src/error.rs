use thiserror::Error;

use crate::optimize::FrontierPoint;

/// Errors raised by the metrics engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Conditioning on an observation that has zero probability.
    #[error("observation {index} has zero probability and cannot be conditioned on")]
    UnobservableEvidence { index: usize },

    #[error("resource limit exceeded: {required} items requested, cap is {cap}")]
    ResourceLimit { required: f64, cap: u64 },

    /// The iterative solver hit its iteration cap. Carries the last iterate.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        iterations: usize,
        residual: f64,
        last: Box<FrontierPoint>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
