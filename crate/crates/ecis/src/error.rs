//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the eCIS pipeline and its file formats.
#[derive(Debug, Error)]
pub enum EcisError {
    /// Shape constraints violated (e.g. a measurement matrix with m >= n).
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    /// A precondition on operation inputs failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An encryption key failed validation.
    #[error("invalid key: {0}")]
    InvalidKey(String),

    /// k = 1 is not a valid security level: a single moved index has no
    /// partner to exchange with, so no derangement exists.
    #[error("no derangement exists for k = 1; use k = 0 or k >= 2")]
    NoDerangement,

    /// Key material is internally inconsistent (e.g. alpha = 0).
    #[error("corrupt key: {0}")]
    CorruptKey(String),

    /// A block grid is internally inconsistent.
    #[error("corrupt block grid: {0}")]
    CorruptGrid(String),

    /// A file is not in a format this crate reads.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// A stream ended before the declared payload.
    #[error("truncated stream: {0}")]
    Truncated(String),

    /// Leading magic bytes did not match any known container.
    #[error("bad magic bytes: expected {expected}")]
    BadMagic { expected: &'static str },

    /// The container version is newer than this implementation.
    #[error("unknown container version {0}")]
    UnknownVersion(u16),

    /// The payload checksum did not validate.
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },

    /// A numeric routine could not produce a usable result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EcisError>;
