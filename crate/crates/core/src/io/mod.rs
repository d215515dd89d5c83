//! Array file formats: NPY, the `MMPI` container, and PNG previews.

use thiserror::Error;

mod mmpi;
mod npy;
mod png;

pub use mmpi::{
    encode_mmpi, parse_mmpi, read_mmpi, write_mmpi, MmpiContainer, CHANNELS_BUNDLE, CHANNELS_MUELLER, CHANNELS_SCALAR,
    MMPI_MAGIC, MMPI_VERSION,
};
pub use npy::{
    encode_npy, parse_npy, read_npy, write_matrix_image_npy, write_matrix_npy, write_npy, write_scalar_map_npy,
    ArrayHeader, ArrayKind, NpyArray,
};
pub use png::{azimuth_color, render_azimuth_png};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported dtype {0}")]
    UnsupportedDtype(String),
    #[error("Fortran-ordered arrays are not supported")]
    FortranOrderUnsupported,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unsupported format version: {0}")]
    VersionUnsupported(String),
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("invalid contents: {0}")]
    Invalid(String),
    #[error("image encoding failed: {0}")]
    Encode(String),
}

/// Element types that can be stored on disk; data is always widened to `f64`
/// in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn descr(self) -> &'static str {
        match self {
            Dtype::F32 => "<f4",
            Dtype::F64 => "<f8",
        }
    }

    pub(crate) fn decode(self, bytes: &[u8]) -> Vec<f64> {
        match self {
            Dtype::F32 => bytes
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("chunk of 4"))))
                .collect(),
            Dtype::F64 => bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect(),
        }
    }

    pub(crate) fn encode(self, values: &[f64], out: &mut Vec<u8>) {
        match self {
            Dtype::F32 => values.iter().for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
            Dtype::F64 => values.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
        }
    }
}
