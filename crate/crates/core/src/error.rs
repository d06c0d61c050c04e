use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("scenario generation failed: {0}")]
    Generation(String),

    /// A scenario or request document could not be read. `field` names the
    /// offending JSON path.
    #[error("parse error at `{field}`: {reason}")]
    Parse { field: String, reason: String },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("infeasible allocation produced by {policy}: {detail}")]
    InfeasibleAllocation { policy: String, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
