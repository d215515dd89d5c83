//! Mueller matrix formation from raw intensities and calibration matrices,
//! and folding a polarimetric transform into the calibration.
//!
//! A polarimeter measures per pixel the intensity matrix `B = A · M · W`,
//! where the columns of the analyzer matrix `A` and the rows of the modulator
//! matrix `W` are the Stokes vectors used for analysis and modulation. The
//! sample is recovered as `M = A⁻¹ · B · W⁻¹`.
//!
//! A change of basis `M' = T M T⁻¹` yields the same result as replacing the
//! calibration by `A' = A T⁻¹` and `W' = T W` while keeping `B`, so an
//! augmentation can be applied at data-loading time without ever forming `M`.

use crate::image::{IntensityStack, MatrixImage, MuellerImage};
use crate::linalg::Mat4;
use crate::par;
use crate::transforms::polar::check_orthogonal;
use crate::Error;

/// Analyzer and modulator matrices, either shared by all pixels or given per
/// pixel.
#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationPair {
    Global { analyzer: Mat4, modulator: Mat4 },
    PerPixel { analyzer: MatrixImage, modulator: MatrixImage },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Global,
    PerPixel,
}

impl CalibrationPair {
    pub fn global(analyzer: Mat4, modulator: Mat4) -> Self {
        CalibrationPair::Global { analyzer, modulator }
    }

    pub fn per_pixel(analyzer: MatrixImage, modulator: MatrixImage) -> Result<Self, Error> {
        if analyzer.dims() != modulator.dims() {
            return Err(Error::DimensionMismatch { expected: analyzer.dims(), found: modulator.dims() });
        }
        Ok(CalibrationPair::PerPixel { analyzer, modulator })
    }

    pub fn arity(&self) -> Arity {
        match self {
            CalibrationPair::Global { .. } => Arity::Global,
            CalibrationPair::PerPixel { .. } => Arity::PerPixel,
        }
    }

    /// Checks that a per-pixel calibration matches the image dimensions.
    pub fn check_dims(&self, dims: (usize, usize)) -> Result<(), Error> {
        match self {
            CalibrationPair::Global { .. } => Ok(()),
            CalibrationPair::PerPixel { analyzer, .. } if analyzer.dims() == dims => Ok(()),
            CalibrationPair::PerPixel { analyzer, .. } => {
                Err(Error::DimensionMismatch { expected: dims, found: analyzer.dims() })
            }
        }
    }

    /// `(A, W)` at pixel index `i`.
    #[inline]
    pub fn at(&self, i: usize) -> (Mat4, Mat4) {
        match self {
            CalibrationPair::Global { analyzer, modulator } => (*analyzer, *modulator),
            CalibrationPair::PerPixel { analyzer, modulator } => (analyzer.pixels()[i], modulator.pixels()[i]),
        }
    }

    fn map(&self, f: impl Fn(&Mat4, &Mat4) -> (Mat4, Mat4) + Sync + Send) -> Self {
        match self {
            CalibrationPair::Global { analyzer, modulator } => {
                let (analyzer, modulator) = f(analyzer, modulator);
                CalibrationPair::Global { analyzer, modulator }
            }
            CalibrationPair::PerPixel { analyzer, modulator } => {
                let pairs = par::map_indices(analyzer.len(), |i| f(&analyzer.pixels()[i], &modulator.pixels()[i]));
                let (a, w): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
                let (h, wd) = analyzer.dims();
                CalibrationPair::PerPixel {
                    analyzer: MatrixImage::from_parts_unchecked(h, wd, a),
                    modulator: MatrixImage::from_parts_unchecked(h, wd, w),
                }
            }
        }
    }
}

/// Replaces the calibration by `A' = A T⁻¹` and `W' = T W` for an orthogonal
/// `T`, using `T⁻¹ = Tᵀ`.
pub fn embed_calibration(cal: &CalibrationPair, t_p: &Mat4) -> Result<CalibrationPair, Error> {
    check_orthogonal(t_p)?;
    if *t_p == Mat4::IDENTITY {
        return Ok(cal.clone());
    }
    let t = *t_p;
    let t_inv = t.transpose();
    Ok(cal.map(move |a, w| (*a * t_inv, t * *w)))
}

/// Per pixel `M = A⁻¹ · B · W⁻¹`.
pub fn compute_mueller(b: &IntensityStack, cal: &CalibrationPair) -> Result<MuellerImage, Error> {
    cal.check_dims(b.dims())?;
    let (height, width) = b.dims();
    let results: Vec<Option<Mat4>> = match cal {
        CalibrationPair::Global { analyzer, modulator } => {
            let a_inv = analyzer.inverse().map_err(|_| Error::SingularCalibration { first_pixel: 0, failed: b.len() })?;
            let w_inv = modulator.inverse().map_err(|_| Error::SingularCalibration { first_pixel: 0, failed: b.len() })?;
            par::map_pixels(b.pixels(), |m| Some(a_inv * *m * w_inv))
        }
        CalibrationPair::PerPixel { analyzer, modulator } => par::map_indices(b.len(), |i| {
            let a_inv = analyzer.pixels()[i].inverse().ok()?;
            let w_inv = modulator.pixels()[i].inverse().ok()?;
            Some(a_inv * b.pixels()[i] * w_inv)
        }),
    };
    let failed = results.iter().filter(|r| r.is_none()).count();
    if failed > 0 {
        let first_pixel = results.iter().position(Option::is_none).unwrap_or(0);
        return Err(Error::SingularCalibration { first_pixel, failed });
    }
    Ok(MatrixImage::from_parts_unchecked(height, width, results.into_iter().flatten().collect()))
}

/// Analyzer matrix whose columns are four Stokes vectors forming a regular
/// tetrahedron on the Poincaré sphere; its transpose is the matching
/// modulator. Both have condition number √3.
pub fn tetrahedral_analyzer() -> Mat4 {
    let s = 1.0 / 3.0_f64.sqrt();
    let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let mut a = Mat4::ZERO;
    for (col, d) in dirs.iter().enumerate() {
        a.0[0][col] = 1.0;
        for k in 0..3 {
            a.0[k + 1][col] = d[k];
        }
    }
    a
}
