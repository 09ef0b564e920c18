use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin {0} is not a positive multiple of 1/2")]
    InvalidSpin(f64),

    #[error("spin f = {f} needs dimension {dim}, above the cap of {cap}")]
    SpinTooLarge { f: f64, dim: usize, cap: usize },

    #[error("photon number must be at least 1, got {0}")]
    InvalidPhotonNumber(i64),

    #[error("matrix dimensions do not match: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("joint Hilbert space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("schedule has {got} pulses but the parameters expect {expected}")]
    ScheduleMismatch { expected: usize, got: usize },

    #[error("state is not normalized: trace/norm deviates from 1 by {0:e}")]
    NotNormalized(f64),

    #[error("covariance lost positive semidefiniteness (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("least-squares fit is rank deficient: {0}")]
    RankDeficient(String),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
