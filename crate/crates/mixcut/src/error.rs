use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] mixcut_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("io: {0}")]
    Stream(#[from] std::io::Error),
    #[error("mxb1: {0}")]
    Format(String),
    #[error("{file}, row {row}: {message}")]
    Csv { file: String, row: usize, message: String },
    #[error("policy line {line}: {message}")]
    Policy { line: usize, message: String },
    #[error("png: {0}")]
    Image(#[from] image::ImageError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for validation failures, 3 for IO and parse failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(_) | Error::Usage(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
