use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed row or value in an input file. `line` is 1-based.
    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("attribute index {index} out of range for schema of length {len}")]
    AttributeIndex { index: usize, len: usize },

    #[error("cannot compute an inconsistency measure over zero images")]
    EmptyGroup,

    #[error("dataset contains no subject groups")]
    EmptyDataset,

    #[error("invalid prediction: {0}")]
    Prediction(String),

    #[error("image error for {path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("degenerate image {width}x{height}: both sides must be at least {min} pixels")]
    DegenerateImage {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("landmark {name} at ({x}, {y}) lies outside a {width}x{height} image")]
    LandmarkOutOfBounds {
        name: &'static str,
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("no image of subject `{subject}` could be scored")]
    AllImagesFailed { subject: String },

    #[error(
        "quality scores are missing for subject `{subject}`; run quality scoring first \
         (pass --images or cache quality features in the prediction file)"
    )]
    MissingQuality { subject: String },

    #[error("subject `{0}` has no consolidated attributes")]
    MissingSubject(String),

    #[error("subject mismatch: {0}")]
    SubjectMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("majority vote needs at least one voter with a matching confidence")]
    EmptyVote,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
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
