use thiserror::Error;

/// Errors raised by the numeric kernel and the interval constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid trial data: {0}")]
    InvalidData(String),

    #[error("pooled response rate is {0}; information is undefined")]
    DegeneratePooledRate(f64),

    #[error("information decreased between stages (I1 = {i1}, I2 = {i2})")]
    InformationDecrease { i1: f64, i2: f64 },

    #[error("probability {0} outside the open unit interval")]
    ProbabilityDomain(f64),

    #[error("objective has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("iteration limit of {0} reached")]
    MaxIterations(usize),

    #[error("empirical quantile of an empty sample")]
    EmptySample,

    #[error("non-finite argument: {0}")]
    NonFinite(&'static str),

    #[error("conditional bootstrap acceptance rate fell below {floor} ({accepted} of {attempts} draws)")]
    RejectionStarvation {
        floor: f64,
        accepted: usize,
        attempts: usize,
    },

    #[error("randomisation p-value is {0}; the interval is unbounded")]
    DegeneratePValue(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
