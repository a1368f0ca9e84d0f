use std::path::PathBuf;

use roughvol_core::{Error as CoreError, ErrorClass};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: row {row}: {msg}")]
    Parse { path: PathBuf, row: usize, msg: String },
    #[error("{path}: row {row}: time does not increase within day {day}")]
    Order { path: PathBuf, row: usize, day: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage '{stage}' failed: {source}")]
    Stage { stage: String, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Core(e) => e.class(),
            Error::Io { .. } | Error::Config(_) => ErrorClass::Config,
            Error::Parse { .. } | Error::Order { .. } => ErrorClass::Data,
            Error::Stage { source, .. } => source.class(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }

    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T, E: Into<Error>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|e| e.into().in_stage(stage))
    }
}
