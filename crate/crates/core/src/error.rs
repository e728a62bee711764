use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt image: {0}")]
    CorruptImage(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid seam: {0}")]
    InvalidSeam(String),

    #[error("image width {0} is too small to remove a seam")]
    WidthTooSmall(usize),

    #[error("image has no pixels")]
    EmptyImage,

    #[error("image height {height} exceeds the brute-force cap of {cap} rows")]
    ImageTooLarge { height: usize, cap: usize },

    #[error("invalid target size {target} for dimension {current}")]
    InvalidTarget { target: usize, current: usize },

    #[error("target size {target} needs more than one pass from {current} (limit {limit})")]
    TargetTooLarge {
        target: usize,
        current: usize,
        limit: usize,
    },

    #[error("removal mask marks no pixels")]
    EmptyMask,

    #[error("requested size {size} exceeds the {width}x{height} source")]
    SizeExceedsSource {
        size: usize,
        width: usize,
        height: usize,
    },

    #[error("brute force requested at size {size}, above the cap of {cap}")]
    SolverCapViolated { size: usize, cap: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("nothing to plot")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed benchmark csv: {0}")]
    Csv(String),
}
