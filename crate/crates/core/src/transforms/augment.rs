//! Joint spatial and polarimetric augmentation.
//!
//! An [`AugmentSpec`] describes one isometry: optional flips followed by a
//! rotation. It is applied to pixel positions through [`resample_with`] and
//! to polarization states through the matching orthogonal change of basis
//! `T_p = R_p(θ) · H_k^n`, where `n` is the number of flips. Flips are always
//! applied before the rotation in both domains.
//!
//! Orientation convention: a positive angle rotates the image content
//! counter-clockwise as displayed (row index increasing downwards), and
//! azimuth angles are measured counter-clockwise from the +x (column) axis as
//! displayed. Under this convention a pixel carrying a retarder with azimuth
//! `φ` lands, after augmentation, at a new position with azimuth `φ + θ`.

use serde::{Deserialize, Serialize};

use crate::image::{IntensityStack, MatrixImage, MuellerImage};
use crate::linalg::{Mat2, Mat4, Vec2};
use crate::transforms::calibration::{embed_calibration, CalibrationPair};
use crate::transforms::polar::{conjugate_image, polar_flip_axis_aligned, polar_rotation_matrix};
use crate::transforms::spatial::{
    forward_map, image_center, resample_with, spatial_flip_matrix, spatial_rotation_matrix, FlipKind, Interpolation,
    Padding,
};
use crate::Error;

/// One fully resolved augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    /// Rotation angle in radians, counter-clockwise on screen.
    pub rotation: f64,
    /// Mirror across the horizontal axis (top-bottom), `diag(1, -1)`.
    pub flip_h: bool,
    /// Mirror across the vertical axis (left-right), `diag(-1, 1)`.
    pub flip_v: bool,
    pub padding: Padding,
    pub interpolation: Interpolation,
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        Self::identity()
    }
}

impl AugmentSpec {
    pub fn identity() -> Self {
        Self {
            rotation: 0.0,
            flip_h: false,
            flip_v: false,
            padding: Padding::default(),
            interpolation: Interpolation::default(),
            seed: 0,
        }
    }

    pub fn rotation(theta: f64) -> Self {
        Self { rotation: theta, ..Self::identity() }
    }

    pub fn with_flips(mut self, flip_h: bool, flip_v: bool) -> Self {
        self.flip_h = flip_h;
        self.flip_v = flip_v;
        self
    }

    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.rotation.is_finite() {
            return Err(Error::InvalidArgument(format!("rotation angle {} is not finite", self.rotation)));
        }
        Ok(())
    }

    fn flip_matrix(&self) -> Mat2 {
        match (self.flip_h, self.flip_v) {
            (false, false) => Mat2::IDENTITY,
            (true, false) => spatial_flip_matrix(FlipKind::Horizontal),
            (false, true) => spatial_flip_matrix(FlipKind::Vertical),
            (true, true) => spatial_flip_matrix(FlipKind::Both),
        }
    }

    /// `R_s(θ) · F_s` in display coordinates (y up).
    pub fn display_matrix(&self) -> Mat2 {
        if self.rotation == 0.0 {
            return self.flip_matrix();
        }
        spatial_rotation_matrix(self.rotation) * self.flip_matrix()
    }

    /// The spatial transform in pixel coordinates (row index increasing
    /// downwards), `R_s(-θ) · F_s`.
    pub fn spatial_matrix(&self) -> Mat2 {
        if self.rotation == 0.0 {
            return self.flip_matrix();
        }
        spatial_rotation_matrix(-self.rotation) * self.flip_matrix()
    }

    /// `T_p = R_p(θ) · H_k^n` with `n` the number of flips.
    pub fn polar_matrix(&self) -> Mat4 {
        let flip = if self.flip_h ^ self.flip_v { polar_flip_axis_aligned() } else { Mat4::IDENTITY };
        if self.rotation == 0.0 {
            return flip;
        }
        polar_rotation_matrix(self.rotation) * flip
    }

    /// Where the pixel center `p` of an `height × width` input lands.
    pub fn map_point(&self, p: Vec2, height: usize, width: usize) -> Vec2 {
        forward_map(&self.spatial_matrix(), image_center(height, width), p)
    }

    /// The input coordinate sampled by output pixel `p`.
    pub fn source_point(&self, p: Vec2, height: usize, width: usize) -> Vec2 {
        let inverse = self.spatial_matrix().transpose();
        forward_map(&inverse, image_center(height, width), p)
    }

    /// Output pixel `(y, x)` that an input pixel maps to, rounded to the
    /// nearest pixel center, or `None` when it leaves the grid.
    pub fn map_pixel(&self, y: usize, x: usize, height: usize, width: usize) -> Option<(usize, usize)> {
        let q = self.map_point(Vec2::new(x as f64, y as f64), height, width);
        let (qx, qy) = ((q.x + 0.5).floor(), (q.y + 0.5).floor());
        (qx >= 0.0 && qy >= 0.0 && qx < width as f64 && qy < height as f64).then_some((qy as usize, qx as usize))
    }
}

/// Input of [`augment`]: a Mueller image or raw intensities with their
/// calibration.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum AugmentInput {
    Mueller(MuellerImage),
    Raw { intensities: IntensityStack, calibration: CalibrationPair },
}

pub fn augment(input: &AugmentInput, spec: &AugmentSpec) -> Result<AugmentInput, Error> {
    match input {
        AugmentInput::Mueller(img) => augment_mueller(img, spec).map(AugmentInput::Mueller),
        AugmentInput::Raw { intensities, calibration } => {
            let (intensities, calibration) = augment_raw(intensities, calibration, spec)?;
            Ok(AugmentInput::Raw { intensities, calibration })
        }
    }
}

/// Resample then conjugate every pixel by `spec.polar_matrix()`.
pub fn augment_mueller(img: &MuellerImage, spec: &AugmentSpec) -> Result<MuellerImage, Error> {
    let moved = augment_spatial_only(img, spec)?;
    conjugate_image(&moved, &spec.polar_matrix())
}

/// The pixel-position part of [`augment_mueller`] alone, leaving the
/// Mueller matrices in the original instrument frame.
pub fn augment_spatial_only(img: &MuellerImage, spec: &AugmentSpec) -> Result<MuellerImage, Error> {
    spec.validate()?;
    resample_with(img, &spec.spatial_matrix(), spec.padding, spec.interpolation, Mat4::IDENTITY)
}

/// Augments raw data: `B`, and per-pixel `A` and `W`, are resampled
/// spatially, then the polarimetric transform is folded into the calibration
/// with [`embed_calibration`]. Computing `M` from the result yields the
/// augmented Mueller image.
///
/// Out-of-field pixels are filled so that they produce the identity Mueller
/// matrix: per-pixel calibrations get `A = W = B = I`, while with a global
/// calibration `B` is filled with `A · W`.
///
/// The result equals [`augment_mueller`] of the computed Mueller image when
/// the calibration is global or interpolation is nearest. Bilinear blending
/// of per-pixel `A` and `W` is not linear in `M` and differs near edges of
/// calibration variation.
pub fn augment_raw(
    b: &IntensityStack,
    cal: &CalibrationPair,
    spec: &AugmentSpec,
) -> Result<(IntensityStack, CalibrationPair), Error> {
    spec.validate()?;
    cal.check_dims(b.dims())?;
    let t_s = spec.spatial_matrix();
    let (pad, interp) = (spec.padding, spec.interpolation);
    let (b2, cal2) = match cal {
        CalibrationPair::Global { analyzer, modulator } => {
            let fill = *analyzer * *modulator;
            (resample_with(b, &t_s, pad, interp, fill)?, cal.clone())
        }
        CalibrationPair::PerPixel { analyzer, modulator } => {
            let resampled = |m: &MatrixImage| resample_with(m, &t_s, pad, interp, Mat4::IDENTITY);
            let b2 = resampled(b)?;
            let cal2 = CalibrationPair::per_pixel(resampled(analyzer)?, resampled(modulator)?)?;
            (b2, cal2)
        }
    };
    let cal2 = embed_calibration(&cal2, &spec.polar_matrix())?;
    Ok((b2, cal2))
}
