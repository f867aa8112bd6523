use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("chain is not strongly connected")]
    NotStronglyConnected,

    #[error("operation requires an undirected support graph")]
    DirectedInput,

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("duality mismatch at origin {origin}: |difference| = {difference:e}")]
    DualityMismatch { origin: usize, difference: f64 },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
