use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("integral diverges: {0}")]
    Divergence(String),
    #[error(
        "tolerance not met: requested relative {requested:e}, achieved error estimate {achieved:e}"
    )]
    ToleranceNotMet { requested: f64, achieved: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("empty support intersection: {0}")]
    EmptyIntersection(String),
    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
