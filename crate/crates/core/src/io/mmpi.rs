//! The `MMPI` container.
//!
//! Layout (little-endian): magic `MMPI`, `u16` version, `u32` height, `u32`
//! width, `u32` channels, `u8` dtype code (4 = f32, 8 = f64), 7 reserved zero
//! bytes, then the C-order payload of `height · width · channels` values.

use std::fs;
use std::path::Path;

use crate::image::{MatrixImage, ScalarMap};
use crate::io::{Dtype, FormatError};
use crate::transforms::CalibrationPair;

pub const MMPI_MAGIC: &[u8; 4] = b"MMPI";
pub const MMPI_VERSION: u16 = 1;
pub const CHANNELS_MUELLER: u32 = 16;
pub const CHANNELS_SCALAR: u32 = 1;
/// `A`, `B` and `W` per pixel, 16 channels each, in that order.
pub const CHANNELS_BUNDLE: u32 = 48;

const HEADER_LEN: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct MmpiContainer {
    pub height: u32,
    pub width: u32,
    pub channels: u32,
    pub dtype: Dtype,
    pub data: Vec<f64>,
}

impl MmpiContainer {
    fn pixels(&self) -> usize {
        self.height as usize * self.width as usize
    }

    fn check(&self) -> Result<(), FormatError> {
        if self.height == 0 || self.width == 0 || self.channels == 0 {
            return Err(FormatError::ShapeMismatch(format!(
                "zero-sized container {}x{}x{}",
                self.height, self.width, self.channels
            )));
        }
        let expected = self.pixels() * self.channels as usize;
        if self.data.len() != expected {
            return Err(FormatError::ShapeMismatch(format!(
                "{}x{}x{} needs {expected} values, got {}",
                self.height,
                self.width,
                self.channels,
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn from_mueller(img: &MatrixImage) -> Self {
        MmpiContainer {
            height: img.height() as u32,
            width: img.width() as u32,
            channels: CHANNELS_MUELLER,
            dtype: Dtype::F64,
            data: img.to_flat(),
        }
    }

    pub fn from_scalar_map(map: &ScalarMap) -> Self {
        MmpiContainer {
            height: map.height() as u32,
            width: map.width() as u32,
            channels: CHANNELS_SCALAR,
            dtype: Dtype::F64,
            data: map.values().to_vec(),
        }
    }

    /// Packs intensities and a calibration into one 48-channel frame; a global
    /// calibration is broadcast to every pixel.
    pub fn from_bundle(intensities: &MatrixImage, calibration: &CalibrationPair) -> Result<Self, FormatError> {
        calibration.check_dims(intensities.dims()).map_err(|e| FormatError::Invalid(e.to_string()))?;
        let mut data = Vec::with_capacity(intensities.len() * 48);
        for (i, b) in intensities.pixels().iter().enumerate() {
            let (a, w) = calibration.at(i);
            data.extend_from_slice(&a.to_row_major());
            data.extend_from_slice(&b.to_row_major());
            data.extend_from_slice(&w.to_row_major());
        }
        Ok(MmpiContainer {
            height: intensities.height() as u32,
            width: intensities.width() as u32,
            channels: CHANNELS_BUNDLE,
            dtype: Dtype::F64,
            data,
        })
    }

    pub fn into_mueller(self) -> Result<MatrixImage, FormatError> {
        self.expect_channels(CHANNELS_MUELLER)?;
        MatrixImage::from_flat(self.height as usize, self.width as usize, &self.data)
            .map_err(|e| FormatError::Invalid(e.to_string()))
    }

    pub fn into_scalar_map(self) -> Result<ScalarMap, FormatError> {
        self.expect_channels(CHANNELS_SCALAR)?;
        ScalarMap::new(self.height as usize, self.width as usize, self.data)
            .map_err(|e| FormatError::Invalid(e.to_string()))
    }

    /// Splits a bundle into intensities and a per-pixel calibration.
    pub fn into_bundle(self) -> Result<(MatrixImage, CalibrationPair), FormatError> {
        self.expect_channels(CHANNELS_BUNDLE)?;
        let (h, w) = (self.height as usize, self.width as usize);
        let mut parts: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(h * w * 16));
        for px in self.data.chunks_exact(48) {
            for (k, part) in parts.iter_mut().enumerate() {
                part.extend_from_slice(&px[16 * k..16 * (k + 1)]);
            }
        }
        let invalid = |e: crate::Error| FormatError::Invalid(e.to_string());
        let analyzer = MatrixImage::from_flat(h, w, &parts[0]).map_err(invalid)?;
        let intensities = MatrixImage::from_flat(h, w, &parts[1]).map_err(invalid)?;
        let modulator = MatrixImage::from_flat(h, w, &parts[2]).map_err(invalid)?;
        let calibration = CalibrationPair::per_pixel(analyzer, modulator).map_err(invalid)?;
        Ok((intensities, calibration))
    }

    fn expect_channels(&self, channels: u32) -> Result<(), FormatError> {
        if self.channels != channels {
            return Err(FormatError::ShapeMismatch(format!("expected {channels} channels, got {}", self.channels)));
        }
        Ok(())
    }
}

pub fn encode_mmpi(c: &MmpiContainer) -> Result<Vec<u8>, FormatError> {
    c.check()?;
    let mut out = Vec::with_capacity(HEADER_LEN + c.data.len() * c.dtype.size());
    out.extend_from_slice(MMPI_MAGIC);
    out.extend_from_slice(&MMPI_VERSION.to_le_bytes());
    out.extend_from_slice(&c.height.to_le_bytes());
    out.extend_from_slice(&c.width.to_le_bytes());
    out.extend_from_slice(&c.channels.to_le_bytes());
    out.push(c.dtype.size() as u8);
    out.extend_from_slice(&[0; 7]);
    c.dtype.encode(&c.data, &mut out);
    Ok(out)
}

pub fn parse_mmpi(bytes: &[u8]) -> Result<MmpiContainer, FormatError> {
    if bytes.len() < 4 || &bytes[..4] != MMPI_MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::BadHeader(format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len())));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != MMPI_VERSION {
        return Err(FormatError::VersionUnsupported(format!("MMPI version {version}")));
    }
    let (height, width, channels) = (u32_at(6), u32_at(10), u32_at(14));
    let dtype = match bytes[18] {
        4 => Dtype::F32,
        8 => Dtype::F64,
        code => return Err(FormatError::UnsupportedDtype(format!("MMPI dtype code {code}"))),
    };
    let payload = &bytes[HEADER_LEN..];
    let expected = height as usize * width as usize * channels as usize * dtype.size();
    if payload.len() != expected {
        return Err(FormatError::ShapeMismatch(format!(
            "payload has {} bytes, {height}x{width}x{channels} of {} needs {expected}",
            payload.len(),
            dtype.descr()
        )));
    }
    let c = MmpiContainer { height, width, channels, dtype, data: dtype.decode(payload) };
    c.check()?;
    Ok(c)
}

pub fn read_mmpi(path: impl AsRef<Path>) -> Result<MmpiContainer, FormatError> {
    parse_mmpi(&fs::read(path)?)
}

pub fn write_mmpi(path: impl AsRef<Path>, c: &MmpiContainer) -> Result<(), FormatError> {
    fs::write(path, encode_mmpi(c)?)?;
    Ok(())
}
