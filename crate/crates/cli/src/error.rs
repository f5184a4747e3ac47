use std::path::Path;

/// Exit status 0 is success; the codes below are stable.
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: validation error: {message}")]
    Validation { path: String, message: String },
    /// The partial trajectory has been written; `summary` describes it.
    #[error("{path}: {message}")]
    Divergence {
        path: String,
        message: String,
        summary: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Usage(_) => EXIT_VALIDATION,
            CliError::Divergence { .. } => EXIT_DIVERGENCE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}
