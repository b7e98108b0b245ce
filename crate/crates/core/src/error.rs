use std::path::PathBuf;

/// Errors raised anywhere in the detection, rendering and scoring pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("quadrilateral fit failed: {0}")]
    FitFailure(String),

    #[error("malformed patch group: {0}")]
    MalformedGroup(String),

    #[error("invalid hypothesis: {0}")]
    InvalidHypothesis(String),

    #[error("rejected scene: {0}")]
    RejectedScene(String),

    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("scoring error: {0}")]
    Scoring(String),

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
