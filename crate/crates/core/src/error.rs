use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the detector pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("degenerate image: side {size} is below the minimum of {min}")]
    DegenerateImage { size: usize, min: usize },
    #[error("image has zero intensity variance over the evaluation disk")]
    ZeroVarianceImage,
    #[error("curve has zero variance")]
    ZeroVarianceCurve,
    #[error("too few samples: {count} (need at least {min})")]
    TooFewSamples { count: usize, min: usize },
    #[error("image sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("baseline negentropy {baseline:.3e} is below the floor {floor:.1e}; image is too close to Gaussian")]
    NearGaussianImage { baseline: f64, floor: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("image listed in manifest is missing: {0}")]
    MissingImage(PathBuf),
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
