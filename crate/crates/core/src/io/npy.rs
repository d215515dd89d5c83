//! NPY (format version 1.0 / 2.0) reading and writing.
//!
//! Only little-endian `f4`/`f8` data in C order is accepted. Writers always
//! produce version 1.0, `<f8`, C order, with the header padded so the payload
//! starts on a 64-byte boundary.

use std::fs;
use std::path::Path;

use crate::image::{MatrixImage, ScalarMap};
use crate::io::{Dtype, FormatError};
use crate::linalg::Mat4;

const MAGIC: &[u8; 6] = b"\x93NUMPY";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayHeader {
    pub dtype: Dtype,
    pub shape: Vec<usize>,
}

impl ArrayHeader {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

/// A decoded array, widened to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub header: ArrayHeader,
    pub data: Vec<f64>,
}

/// What an accepted array shape denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// `(H, W, 4, 4)` or `(H, W, 16)`.
    MatrixImage { height: usize, width: usize },
    /// `(H, W)`.
    ScalarMap { height: usize, width: usize },
    /// `(4, 4)`: one matrix, e.g. a global calibration, or a 4×4 scalar map.
    Matrix,
}

impl NpyArray {
    pub fn kind(&self) -> Result<ArrayKind, FormatError> {
        classify(&self.header.shape)
    }

    pub fn into_matrix_image(self) -> Result<MatrixImage, FormatError> {
        match self.kind()? {
            ArrayKind::MatrixImage { height, width } => {
                MatrixImage::from_flat(height, width, &self.data).map_err(|e| FormatError::Invalid(e.to_string()))
            }
            _ => Err(FormatError::ShapeMismatch(format!(
                "expected (H, W, 4, 4) or (H, W, 16), got {:?}",
                self.header.shape
            ))),
        }
    }

    /// Any 2-D array, including `(4, 4)`.
    pub fn into_scalar_map(self) -> Result<ScalarMap, FormatError> {
        let (height, width) = match self.kind()? {
            ArrayKind::ScalarMap { height, width } => (height, width),
            ArrayKind::Matrix => (4, 4),
            ArrayKind::MatrixImage { .. } => {
                return Err(FormatError::ShapeMismatch(format!("expected (H, W), got {:?}", self.header.shape)))
            }
        };
        ScalarMap::new(height, width, self.data).map_err(|e| FormatError::Invalid(e.to_string()))
    }

    pub fn into_matrix(self) -> Result<Mat4, FormatError> {
        match self.kind()? {
            ArrayKind::Matrix => Ok(Mat4::from_row_major(&self.data)),
            _ => Err(FormatError::ShapeMismatch(format!("expected (4, 4), got {:?}", self.header.shape))),
        }
    }
}

fn classify(shape: &[usize]) -> Result<ArrayKind, FormatError> {
    if shape.contains(&0) {
        return Err(FormatError::ShapeMismatch(format!("zero-sized dimension in {shape:?}")));
    }
    match *shape {
        [4, 4] => Ok(ArrayKind::Matrix),
        [height, width, 4, 4] | [height, width, 16] => Ok(ArrayKind::MatrixImage { height, width }),
        [height, width] => Ok(ArrayKind::ScalarMap { height, width }),
        _ => Err(FormatError::ShapeMismatch(format!("unsupported shape {shape:?}"))),
    }
}

/// Extracts the value that follows `'key':` in a header dictionary.
fn dict_value<'a>(header: &'a str, key: &str) -> Result<&'a str, FormatError> {
    let pattern = format!("'{key}'");
    let start = header
        .find(&pattern)
        .or_else(|| header.find(&format!("\"{key}\"")))
        .ok_or_else(|| FormatError::BadHeader(format!("missing key {key}")))?;
    let rest = &header[start + pattern.len()..];
    let rest = rest.trim_start().strip_prefix(':').ok_or_else(|| FormatError::BadHeader(format!("no ':' after {key}")))?;
    let rest = rest.trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')').map(|i| i + 1)
    } else if rest.starts_with('\'') || rest.starts_with('"') {
        let q = rest.as_bytes()[0] as char;
        rest[1..].find(q).map(|i| i + 2)
    } else {
        rest.find([',', '}'])
    }
    .ok_or_else(|| FormatError::BadHeader(format!("unterminated value for {key}")))?;
    Ok(rest[..end].trim())
}

fn parse_header(header: &str) -> Result<(ArrayHeader, bool), FormatError> {
    let descr = dict_value(header, "descr")?.trim_matches(|c| c == '\'' || c == '"');
    let dtype = match descr {
        "<f8" => Dtype::F64,
        "<f4" => Dtype::F32,
        other => return Err(FormatError::UnsupportedDtype(other.to_string())),
    };
    let fortran = match dict_value(header, "fortran_order")? {
        "False" => false,
        "True" => true,
        other => return Err(FormatError::BadHeader(format!("fortran_order = {other}"))),
    };
    let shape_str = dict_value(header, "shape")?;
    let inner = shape_str
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| FormatError::BadHeader(format!("shape {shape_str}")))?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.trim_end_matches('L').parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FormatError::BadHeader(format!("shape {shape_str}: {e}")))?;
    Ok((ArrayHeader { dtype, shape }, fortran))
}

/// Decodes NPY bytes.
pub fn parse_npy(bytes: &[u8]) -> Result<NpyArray, FormatError> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let (major, minor) = (bytes[6], bytes[7]);
    let (header_len, offset) = match major {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 => {
            if bytes.len() < 12 {
                return Err(FormatError::BadHeader("truncated header length".into()));
            }
            (u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize, 12)
        }
        _ => return Err(FormatError::VersionUnsupported(format!("NPY {major}.{minor}"))),
    };
    let header_end = offset + header_len;
    if bytes.len() < header_end {
        return Err(FormatError::BadHeader("truncated header".into()));
    }
    let header = std::str::from_utf8(&bytes[offset..header_end])
        .map_err(|_| FormatError::BadHeader("header is not valid text".into()))?;
    let (header, fortran) = parse_header(header)?;
    if fortran {
        return Err(FormatError::FortranOrderUnsupported);
    }
    classify(&header.shape)?;
    let payload = &bytes[header_end..];
    let expected = header.element_count() * header.dtype.size();
    if payload.len() != expected {
        return Err(FormatError::ShapeMismatch(format!(
            "payload has {} bytes, shape {:?} of {} needs {expected}",
            payload.len(),
            header.shape,
            header.dtype.descr()
        )));
    }
    let data = header.dtype.decode(payload);
    Ok(NpyArray { header, data })
}

pub fn read_npy(path: impl AsRef<Path>) -> Result<NpyArray, FormatError> {
    parse_npy(&fs::read(path)?)
}

/// Encodes `data` with the given shape as NPY 1.0 `<f8`.
pub fn encode_npy(shape: &[usize], data: &[f64]) -> Result<Vec<u8>, FormatError> {
    let count: usize = shape.iter().product();
    if count != data.len() {
        return Err(FormatError::ShapeMismatch(format!("shape {shape:?} needs {count} values, got {}", data.len())));
    }
    let dims = match shape {
        [d] => format!("({d},)"),
        _ => format!("({})", shape.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")),
    };
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': {dims}, }}");
    let unpadded = MAGIC.len() + 4 + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');
    let header_len = u16::try_from(header.len()).map_err(|_| FormatError::Invalid("header too long".into()))?;
    let mut out = Vec::with_capacity(MAGIC.len() + 4 + header.len() + data.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn write_npy(path: impl AsRef<Path>, shape: &[usize], data: &[f64]) -> Result<(), FormatError> {
    fs::write(path, encode_npy(shape, data)?)?;
    Ok(())
}

/// Writes a matrix image as `(H, W, 4, 4)`.
pub fn write_matrix_image_npy(path: impl AsRef<Path>, img: &MatrixImage) -> Result<(), FormatError> {
    write_npy(path, &[img.height(), img.width(), 4, 4], &img.to_flat())
}

pub fn write_scalar_map_npy(path: impl AsRef<Path>, map: &ScalarMap) -> Result<(), FormatError> {
    write_npy(path, &[map.height(), map.width()], map.values())
}

pub fn write_matrix_npy(path: impl AsRef<Path>, m: &Mat4) -> Result<(), FormatError> {
    write_npy(path, &[4, 4], &m.to_row_major())
}
