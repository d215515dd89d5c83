//! Spatial isometries and inverse-mapping resampling of matrix images.
//!
//! Pixel coordinates are `x` = column (increasing right) and `y` = row
//! (increasing down). The rotation center is `((W-1)/2, (H-1)/2)`, the center
//! of the pixel grid under the pixel-center convention.

use serde::{Deserialize, Serialize};

use crate::image::MatrixImage;
use crate::linalg::{Mat2, Mat4, Vec2};
use crate::par;
use crate::Error;

/// How source coordinates outside the image are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    /// Write a fill matrix (the 4×4 identity for Mueller images).
    #[default]
    IdentityFill,
    /// Reflect the coordinate at the image border (half-sample symmetric).
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipKind {
    /// `diag(1, -1)`: mirrors across the horizontal axis (top-bottom).
    Horizontal,
    /// `diag(-1, 1)`: mirrors across the vertical axis (left-right).
    Vertical,
    /// Both flips combined, `diag(-1, -1)`.
    Both,
}

/// Counter-clockwise rotation matrix `[[cos, -sin], [sin, cos]]`.
pub fn spatial_rotation_matrix(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2([[c, -s], [s, c]])
}

pub fn spatial_flip_matrix(kind: FlipKind) -> Mat2 {
    match kind {
        FlipKind::Horizontal => Mat2([[1.0, 0.0], [0.0, -1.0]]),
        FlipKind::Vertical => Mat2([[-1.0, 0.0], [0.0, 1.0]]),
        FlipKind::Both => Mat2([[-1.0, 0.0], [0.0, -1.0]]),
    }
}

pub fn image_center(height: usize, width: usize) -> Vec2 {
    Vec2::new((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0)
}

/// Forward map `x' = T (x - c) + c`.
pub fn forward_map(t_s: &Mat2, center: Vec2, p: Vec2) -> Vec2 {
    t_s.apply(p - center) + center
}

/// Distance below which a source coordinate is snapped to the pixel grid, so
/// identity and quarter-turn mappings copy pixels exactly.
const SNAP: f64 = 1e-9;

#[inline]
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Half-sample symmetric reflection of `v` into `[-0.5, n - 0.5]`.
#[inline]
fn reflect(v: f64, n: usize) -> f64 {
    let n = n as f64;
    let period = 2.0 * n;
    let t = (v + 0.5).rem_euclid(period);
    let t = if t > n { period - t } else { t };
    t - 0.5
}

#[derive(Debug, Clone, Copy)]
struct Sampler<'a> {
    src: &'a [Mat4],
    height: usize,
    width: usize,
    padding: Padding,
    interpolation: Interpolation,
    fill: Mat4,
}

impl Sampler<'_> {
    #[inline]
    fn pixel(&self, y: usize, x: usize) -> &Mat4 {
        &self.src[y * self.width + x]
    }

    fn sample(&self, p: Vec2) -> Mat4 {
        let (mut x, mut y) = (snap(p.x), snap(p.y));
        let w = self.width as f64;
        let h = self.height as f64;
        if self.padding == Padding::Mirror {
            x = reflect(x, self.width);
            y = reflect(y, self.height);
        }
        match self.interpolation {
            Interpolation::Nearest => {
                let xi = (x + 0.5).floor();
                let yi = (y + 0.5).floor();
                let inside = xi >= 0.0 && xi < w && yi >= 0.0 && yi < h;
                match (inside, self.padding) {
                    (true, _) => *self.pixel(yi as usize, xi as usize),
                    (false, Padding::IdentityFill) => self.fill,
                    (false, Padding::Mirror) => {
                        let xi = xi.clamp(0.0, w - 1.0) as usize;
                        let yi = yi.clamp(0.0, h - 1.0) as usize;
                        *self.pixel(yi, xi)
                    }
                }
            }
            Interpolation::Bilinear => {
                let inside = x >= -SNAP && x <= w - 1.0 + SNAP && y >= -SNAP && y <= h - 1.0 + SNAP;
                if !inside && self.padding == Padding::IdentityFill {
                    return self.fill;
                }
                let x = x.clamp(0.0, w - 1.0);
                let y = y.clamp(0.0, h - 1.0);
                let x0 = x.floor();
                let y0 = y.floor();
                let fx = x - x0;
                let fy = y - y0;
                let x0 = x0 as usize;
                let y0 = y0 as usize;
                if fx == 0.0 && fy == 0.0 {
                    return *self.pixel(y0, x0);
                }
                let x1 = (x0 + 1).min(self.width - 1);
                let y1 = (y0 + 1).min(self.height - 1);
                let weights = [
                    ((1.0 - fx) * (1.0 - fy), y0, x0),
                    (fx * (1.0 - fy), y0, x1),
                    ((1.0 - fx) * fy, y1, x0),
                    (fx * fy, y1, x1),
                ];
                let mut out = [0.0f64; 16];
                for (wgt, yy, xx) in weights {
                    if wgt == 0.0 {
                        continue;
                    }
                    let m = self.pixel(yy, xx).0;
                    for (o, v) in out.iter_mut().zip(m.iter().flatten()) {
                        *o += wgt * v;
                    }
                }
                Mat4::from_row_major(&out)
            }
        }
    }
}

/// Resamples `img` under the spatial isometry `t_s` (pixel coordinates).
///
/// Each output pixel `x'` takes the value interpolated at the inverse-mapped
/// source coordinate `T⁻¹ (x' - c) + c`. Every Mueller element is
/// interpolated independently. Source coordinates outside the image are
/// resolved by `padding`; with [`Padding::IdentityFill`] the output pixel is
/// set to `fill`.
pub fn resample_with(
    img: &MatrixImage,
    t_s: &Mat2,
    padding: Padding,
    interpolation: Interpolation,
    fill: Mat4,
) -> Result<MatrixImage, Error> {
    let (height, width) = img.dims();
    if *t_s == Mat2::IDENTITY {
        return Ok(img.clone());
    }
    let inverse = t_s.inverse()?;
    let center = image_center(height, width);
    let sampler = Sampler { src: img.pixels(), height, width, padding, interpolation, fill };
    let pixels = par::map_indices(height * width, |i| {
        let out = Vec2::new((i % width) as f64, (i / width) as f64);
        sampler.sample(forward_map(&inverse, center, out))
    });
    Ok(MatrixImage::from_parts_unchecked(height, width, pixels))
}

/// [`resample_with`] using the identity matrix as fill value.
pub fn resample(
    img: &MatrixImage,
    t_s: &Mat2,
    padding: Padding,
    interpolation: Interpolation,
) -> Result<MatrixImage, Error> {
    resample_with(img, t_s, padding, interpolation, Mat4::IDENTITY)
}
