use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the sketching pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input parsed fine but violates a precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A node ID or label that does not exist.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation called on an object in the wrong state (e.g. untrained model).
    #[error("state error: {0}")]
    State(String),

    /// AUC needs both classes.
    #[error("AUC is undefined when labels contain a single class")]
    UndefinedAuc,

    /// An error raised while running a named pipeline stage.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn validation(message: impl Into<String>) -> Self {
        Error::Validation(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad input data or parameters rather than the runtime.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_data_error(),
            Error::Parse { .. } | Error::Validation(_) | Error::Domain(_) | Error::UndefinedAuc => true,
            Error::State(_) | Error::Io { .. } => false,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage { stage, source: Box::new(other) },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Tags the error of a fallible step with the pipeline stage it belongs to.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
