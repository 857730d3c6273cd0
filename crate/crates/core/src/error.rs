use thiserror::Error;

/// Errors raised by the attribution toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("exact Shapley refused: {features} features exceeds the cap of {cap}")]
    CapExceeded { features: usize, cap: usize },

    #[error("efficiency identity violated: residual {residual:e}")]
    Efficiency { residual: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("rally {rally_id} failed validation: {violations}")]
    Validation { rally_id: String, violations: String },

    /// Malformed input file; `line` is 1-based.
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
