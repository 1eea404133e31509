use thiserror::Error;

use crate::finite_measures::JointDist;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or mismatched arguments.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An enumeration would exceed its configured cap.
    #[error("resource cap exceeded: {what} needs {needed} > cap {cap}")]
    Resource { what: &'static str, needed: u128, cap: u128 },

    /// Iterative proportional fitting did not reach the requested tolerance.
    #[error("no convergence after {iterations} iterations (margin residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Box<JointDist>,
    },

    /// Should be unreachable when preconditions hold.
    #[error("internal contract violated: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
