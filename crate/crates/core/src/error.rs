use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label map has no pixel above the foreground threshold")]
    EmptyForeground,

    #[error("region rows {row_start}..{row_end}, cols {col_start}..{col_end} exceeds {height}x{width}")]
    OutOfBounds {
        row_start: usize,
        col_start: usize,
        row_end: usize,
        col_end: usize,
        height: usize,
        width: usize,
    },

    #[error("patch {patch_h}x{patch_w} does not fit in {height}x{width}")]
    PatchTooLarge {
        patch_h: usize,
        patch_w: usize,
        height: usize,
        width: usize,
    },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("cross-frame pasting needs at least one donor sample")]
    EmptyPool,

    #[error("no usable samples found")]
    EmptyDataset,

    #[error("split needs at least 10 samples, got {0}")]
    TooFewSamples(usize),

    #[error("split list names unknown sample `{0}`")]
    UnknownStem(String),

    #[error("no file stems shared between predictions and ground truth")]
    EmptyEvaluation,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dimensions {height}x{width}")]
    InvalidDimensions { height: usize, width: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the failure comes from the filesystem or codec rather than the data itself.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image { .. })
    }
}
