use thiserror::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flag, config value or flag combination.
    #[error("usage: {0}")]
    Usage(String),

    #[error("config file {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Core(#[from] rallyshap::Error),

    #[error("{context}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rallyshap::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Core(E::Validation { .. } | E::Parse { .. } | E::Model(_) | E::EmptyDataset) => EXIT_VALIDATION,
            CliError::Core(E::Json(_)) | CliError::Json(_) => EXIT_VALIDATION,
            CliError::Core(E::Io(_)) | CliError::Io { .. } => EXIT_IO,
            CliError::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
            _ => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}
