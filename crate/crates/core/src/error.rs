use thiserror::Error;

/// Errors produced while loading states, assembling Γ matrices, or running
/// the minimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("covariance matrix asymmetry {max_abs:.3e} exceeds hard limit {limit:.1e}")]
    Asymmetric { max_abs: f64, limit: f64 },

    #[error("invalid party structure: {0}")]
    Structure(String),

    #[error("invalid partition query: {0}")]
    Partition(String),

    #[error("invalid mode grouping: {0}")]
    Grouping(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown search strategy `{0}` (expected one of: {1})")]
    UnknownStrategy(String, String),
}

pub type Result<T> = std::result::Result<T, Error>;
