use thiserror::Error;

use crate::decompose::DecomposeError;
use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image dimensions {height}x{width}")]
    InvalidDimensions { height: usize, width: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("non-finite value at pixel {pixel}")]
    NonFinite { pixel: usize },
    #[error("transform is not orthogonal (max deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("singular calibration at pixel {first_pixel} ({failed} pixels failed)")]
    SingularCalibration { first_pixel: usize, failed: usize },
    #[error("mask selects no usable pixels")]
    EmptyMask,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}
