use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0} oracle check(s) failed")]
    OracleFailed(usize),
}

impl Error {
    /// Process exit code for the CLI, one per error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::DimensionMismatch { .. } => 2,
            Error::DegenerateGeometry(_) | Error::InsufficientData(_) => 3,
            Error::Io { .. } | Error::Csv { .. } | Error::Json(_) => 4,
            Error::OracleFailed(_) => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
