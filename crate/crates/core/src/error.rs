use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MintError>;

#[derive(Debug, Error)]
pub enum MintError {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A malformed cell or row in an input file.
    #[error("{}: row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    /// A file-level problem with an input (unreadable, wrong header, join failure).
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<MintError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MintError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MintError::InvalidInput(msg.into())
    }

    /// True when the error stems from bad user input rather than a fault in
    /// the tool itself. The CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        match self {
            MintError::InvalidInput(_) | MintError::Parse { .. } | MintError::Input { .. } => true,
            MintError::Fold { source, .. } => source.is_validation(),
            MintError::Numerical(_) | MintError::Io(_) | MintError::Json(_) => false,
        }
    }

    pub(crate) fn in_fold(self, fold: usize) -> Self {
        match self {
            already @ MintError::Fold { .. } => already,
            other => MintError::Fold {
                fold,
                source: Box::new(other),
            },
        }
    }
}
