use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

/// Errors from constructing or combining the shared numeric types.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("expected {expected} samples, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("dimensions must be positive (got {height}x{width})")]
    EmptyDimensions { height: usize, width: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    Mismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("block index {index} out of range ({count} blocks)")]
    BlockIndex { index: usize, count: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error{}: {source}", .path.as_ref().map(|p| format!(" on {}", p.display())).unwrap_or_default())]
    Io {
        path: Option<PathBuf>,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("malformed matrix text: {0}")]
    MatrixText(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

impl From<std::io::Error> for FormatError {
    fn from(source: std::io::Error) -> Self {
        FormatError::Io { path: None, source }
    }
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("failed to launch `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("`{command}` exited with status {status}: {stderr}")]
    ExitStatus {
        command: String,
        status: i32,
        stderr: String,
    },
    #[error("`{command}` timed out after {timeout:?}")]
    Timeout { command: String, timeout: Duration },
    #[error("`{command}` produced no output file at {path:?}")]
    MissingOutput { command: String, path: PathBuf },
    #[error("unparsable codec output: {0}")]
    Unparsable(#[source] FormatError),
    #[error("codec output is {actual:?}, expected {expected:?}")]
    OutputDimensions {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("temporary file error: {0}")]
    TempFile(#[source] std::io::Error),
    #[error("invalid codec parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Error)]
pub enum DenoiseError {
    #[error("denoiser strength must be positive and finite (got {0})")]
    InvalidStrength(f64),
    #[error("external denoiser failed: {0}")]
    External(#[from] CodecError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Error)]
pub enum JacobianError {
    #[error("step set must be non-empty with distinct positive entries")]
    InvalidSteps,
    #[error("pixel index {index} out of range ({len} pixels)")]
    PixelIndex { index: usize, len: usize },
    #[error("block grid {grid:?} does not match image {image:?}")]
    GridMismatch {
        grid: (usize, usize),
        image: (usize, usize),
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("SSIM needs at least 11x11 pixels (got {height}x{width})")]
    TooSmall { height: usize, width: usize },
}
