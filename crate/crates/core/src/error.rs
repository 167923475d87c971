use thiserror::Error;

use crate::dynamics::ExitRecord;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach rel_tol {rel_tol:e} within {max_depth} levels (last change {last_change:e})")]
    NoConvergence {
        rel_tol: f64,
        max_depth: usize,
        last_change: f64,
    },

    /// The mean first exit time is infinite: an untempered clock (mu = 0,
    /// alpha < 1) has infinite mean waiting time.
    #[error("mean exit time diverges: mu = 0 with alpha = {alpha} < 1")]
    Divergence { alpha: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no exit within {} steps", partial.steps)]
    MaxStepsExceeded { partial: Box<ExitRecord> },

    #[error("{censored} of {total} trajectories exceeded max_steps (limit is 0.1%)")]
    Censored { censored: u64, total: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
