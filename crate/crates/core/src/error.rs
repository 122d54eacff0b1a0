use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FicError>;

#[derive(Debug, Error)]
pub enum FicError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image header: {0}")]
    CorruptHeader(String),
    #[error("corrupt image payload: expected {expected} pixel bytes, found {found}")]
    CorruptPayload { expected: usize, found: usize },

    #[error("block size {block_size} exceeds image dimensions {width}x{height}")]
    BlockTooLarge {
        block_size: usize,
        width: usize,
        height: usize,
    },
    #[error("reduction factor {factor} does not divide block size {size}")]
    NonDivisibleFactor { size: usize, factor: usize },
    #[error("box size {box_size} does not divide block size {size}")]
    NonDivisibleBoxSize { size: usize, box_size: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("incompatible geometry: {0}")]
    IncompatibleGeometry(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("bad magic: not a FIC1 stream")]
    BadMagic,
    #[error("unsupported format version {0}")]
    VersionMismatch(u8),
    #[error("truncated stream")]
    TruncatedStream,
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("empty stream: no stored transformations, compression ratio undefined")]
    EmptyStream,
}
