use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QisError {
    #[error("invalid sensor config: {0}")]
    InvalidConfig(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid burst: {0}")]
    InvalidBurst(String),

    #[error("invalid motion: {0}")]
    InvalidMotion(String),

    #[error("invalid kernel field: {0}")]
    InvalidKernel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("frame count mismatch: expected {expected}, got {actual}")]
    FrameCountMismatch { expected: usize, actual: usize },

    #[error("gain calibration impossible: scene mean is zero")]
    CalibrationImpossible,

    #[error("method `{method}` is incompatible with this burst: {reason}")]
    IncompatibleMethod { method: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad magic {found:?} in {path}, expected \"QISB\"")]
    BadMagic { path: PathBuf, found: [u8; 4] },

    #[error("unsupported QISB version {found} in {path}, expected {expected}")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("truncated {what} in {path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("payload value {value} at offset {offset} exceeds {max} for {bits}-bit data")]
    PayloadOutOfRange {
        offset: usize,
        value: u8,
        max: u8,
        bits: u8,
    },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("malformed metadata: {0}")]
    Metadata(String),

    #[error("image format error: {0}")]
    ImageFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QisError>;
