use thiserror::Error;

use crate::dynamics::SimulationState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("mass matrix is not positive definite (broken basis?)")]
    SingularMass,

    #[error("implicit system matrix is not positive definite")]
    SingularImplicit,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The discrete system blew up. Carries the last finite state.
    #[error("numerical instability at t = {t}: state became non-finite")]
    Instability {
        t: f64,
        last_finite: Box<SimulationState>,
    },

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
