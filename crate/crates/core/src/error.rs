use thiserror::Error;

/// Errors raised by the inspection library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed image file: {0}")]
    MalformedFile(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("kernel of size {size} exceeds image dimension {dim}")]
    KernelTooLarge { size: usize, dim: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("histogram has fewer than two distinct intensities")]
    DegenerateHistogram,
    #[error("binary image has no foreground pixels")]
    EmptyImage,
    #[error("no foreground pixel supports the line")]
    NoSupport,
    #[error("path has no sample point inside the image")]
    PathOutsideImage,
    #[error("color bands overlap: {0}")]
    OverlappingBands(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid scene spec: {0}")]
    SpecInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
