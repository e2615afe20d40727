use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid allocation: {}", .0.join("; "))]
    Structural(Vec<String>),

    #[error("guarantee violated: {0}")]
    Guarantee(String),

    /// A local search found no improving move for `agent`; its estimate is too high.
    #[error("estimate too high for agent {agent}")]
    EstimateTooHigh { agent: usize },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
