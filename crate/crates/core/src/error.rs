use thiserror::Error;

use crate::limits::LimitOutcome;
use crate::tensor::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("capacity exceeded: {what} needs {requested}, cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: String,
        cap: usize,
    },

    #[error("budget of {budget} steps exhausted while {what}")]
    Budget { what: &'static str, budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "tensor is not stochastic: {} ({} violation(s) in total)",
        .0.first_violation().unwrap_or_default(),
        .0.violation_count()
    )]
    NotStochastic(Box<ValidationReport>),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("no limiting distribution: iteration ended with a {} outcome", .0.kind_name())]
    NoLimitingDistribution(Box<LimitOutcome>),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// Budget and capacity failures are the ones a caller can fix by raising
    /// a limit; everything else is a problem with the input itself.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::Capacity { .. } | Error::Budget { .. })
    }
}
