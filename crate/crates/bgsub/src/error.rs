use std::path::PathBuf;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("frame is {actual_width}x{actual_height}, expected {expected_width}x{expected_height}")]
    DimensionMismatch {
        expected_width: u32,
        expected_height: u32,
        actual_width: u32,
        actual_height: u32,
    },

    #[error("mask label {value} at ({x}, {y}) is not one of 0, 127, 255")]
    InvalidMaskLabel { value: u8, x: u32, y: u32 },

    #[error("ground-truth label {value} at ({x}, {y}) is not 0 or 255")]
    InvalidGroundTruthLabel { value: u8, x: u32, y: u32 },

    #[error("confusion matrix is empty")]
    EmptyConfusionMatrix,

    #[error("precision is undefined: no pixels were predicted foreground")]
    UndefinedPrecision,

    #[error("value {value} is outside [0, 1]")]
    ValueOutOfRange { value: f64 },

    #[error("frame source exhausted after {available} frames, needed {needed}")]
    SourceExhausted { available: usize, needed: usize },

    #[error("frame index {index} is out of range (sequence has {frames} frames)")]
    FrameIndexOutOfRange { index: u32, frames: u32 },

    #[error("{path}: file not found")]
    MissingFile { path: PathBuf },

    #[error("{path}: corrupt {format} header: {reason}")]
    CorruptHeader {
        path: PathBuf,
        format: &'static str,
        reason: String,
    },

    #[error("{path}: unsupported bit depth (only 8-bit samples are supported)")]
    UnsupportedBitDepth { path: PathBuf },

    #[error("{path}: unsupported pixel format {format} (expected 8-bit grayscale or RGB)")]
    UnsupportedPixelFormat { path: PathBuf, format: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_parameter(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
