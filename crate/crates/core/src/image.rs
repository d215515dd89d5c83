//! Per-pixel matrix and scalar grids.

use crate::linalg::Mat4;
use crate::Error;

/// An H×W grid of 4×4 real matrices, stored pixel-major (row by row) with
/// each matrix row-major.
///
/// Used both for Mueller images and for raw intensity stacks.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixImage {
    height: usize,
    width: usize,
    pixels: Vec<Mat4>,
}

/// An H×W grid of Mueller matrices.
pub type MuellerImage = MatrixImage;

/// Raw measured intensities `B` per pixel. Negative (dark-corrected) entries
/// are allowed.
pub type IntensityStack = MatrixImage;

impl MatrixImage {
    pub fn new(height: usize, width: usize, pixels: Vec<Mat4>) -> Result<Self, Error> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions { height, width });
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (pixels.len(), 1),
            });
        }
        if let Some(i) = pixels.iter().position(|m| !m.is_finite()) {
            return Err(Error::NonFinite { pixel: i });
        }
        Ok(Self { height, width, pixels })
    }

    pub fn filled(height: usize, width: usize, value: Mat4) -> Result<Self, Error> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> Mat4) -> Result<Self, Error> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (y, x)))
            .map(|(y, x)| f(y, x))
            .collect();
        Self::new(height, width, pixels)
    }

    /// Interprets `values` as `(H, W, 4, 4)` C-order data.
    pub fn from_flat(height: usize, width: usize, values: &[f64]) -> Result<Self, Error> {
        if values.len() != height * width * 16 {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (values.len() / 16, 1),
            });
        }
        Self::new(height, width, values.chunks_exact(16).map(Mat4::from_row_major).collect())
    }

    pub(crate) fn from_parts_unchecked(height: usize, width: usize, pixels: Vec<Mat4>) -> Self {
        debug_assert_eq!(pixels.len(), height * width);
        Self { height, width, pixels }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.pixels.iter().flat_map(|m| m.to_row_major()).collect()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Mat4] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<Mat4> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> &Mat4 {
        &self.pixels[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(&Mat4) -> Mat4 + Sync + Send) -> Self {
        Self::from_parts_unchecked(self.height, self.width, crate::par::map_pixels(&self.pixels, f))
    }
}

/// An H×W grid of real scalars. NaN marks undefined pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

/// Per-pixel azimuth in `[0, π)`, NaN where undefined.
pub type AzimuthMap = ScalarMap;
/// Per-pixel linear retardance in `[0, π]`, NaN where decomposition failed.
pub type RetardanceMap = ScalarMap;

impl ScalarMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self, Error> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions { height, width });
        }
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (values.len(), 1),
            });
        }
        Ok(Self { height, width, values })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self, Error> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Per-pixel inclusion flags; `true` means the pixel enters a metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    values: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, values: Vec<bool>) -> Result<Self, Error> {
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                found: (values.len(), 1),
            });
        }
        Ok(Self { height, width, values })
    }

    pub fn all(height: usize, width: usize) -> Self {
        Self { height, width, values: vec![true; height * width] }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn and(&self, other: &Mask) -> Result<Mask, Error> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch { expected: self.dims(), found: other.dims() });
        }
        Ok(Mask {
            height: self.height,
            width: self.width,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a && b).collect(),
        })
    }

    /// True when every pixel included here is also included in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.values.iter().zip(&other.values).all(|(&a, &b)| !a || b)
    }
}
