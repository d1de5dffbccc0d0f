use std::path::PathBuf;

/// Errors produced by the tone-mapping pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt header: {0}")]
    CorruptHeader(String),

    #[error("corrupt pixel data: {0}")]
    CorruptData(String),

    #[error("dimension overflow: {width}x{height}")]
    DimensionOverflow { width: u64, height: u64 },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite energy at beta = ({beta_left}, {beta_right}): {detail}")]
    NonFiniteEnergy {
        beta_left: f64,
        beta_right: f64,
        detail: String,
    },

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
