//! Polarimetric change-of-basis matrices and their action on Mueller images.

use crate::image::MuellerImage;
use crate::linalg::Mat4;
use crate::Error;

/// Tolerance for accepting a polarimetric transform as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Counter-clockwise rotational change of basis for Stokes vectors and
/// Mueller matrices. The double-angle block sits in rows/columns 2-3.
pub fn polar_rotation_matrix(theta: f64) -> Mat4 {
    let (s, c) = (2.0 * theta).sin_cos();
    Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, -s, 0.0],
        [0.0, s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Mirror transform about an axis at `theta`. At `theta = kπ/2` this is
/// exactly `diag(1, 1, -1, -1)`.
pub fn polar_flip_matrix(theta: f64) -> Mat4 {
    if is_quarter_turn(theta) {
        return polar_flip_axis_aligned();
    }
    let (s, c) = (4.0 * theta).sin_cos();
    Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, s, 0.0],
        [0.0, s, -c, 0.0],
        [0.0, 0.0, 0.0, -1.0],
    ])
}

/// The axis-aligned mirror `H_k`, `diag(1, 1, -1, -1)`.
pub fn polar_flip_axis_aligned() -> Mat4 {
    Mat4::from_diag([1.0, 1.0, -1.0, -1.0])
}

/// True when `theta` is an integer multiple of π/2 (within 1e-12).
fn is_quarter_turn(theta: f64) -> bool {
    let k = (theta / std::f64::consts::FRAC_PI_2).round();
    (theta - k * std::f64::consts::FRAC_PI_2).abs() <= 1e-12 * theta.abs().max(1.0)
}

pub(crate) fn check_orthogonal(t: &Mat4) -> Result<(), Error> {
    let deviation = (*t * t.transpose()).max_abs_diff(&Mat4::IDENTITY);
    if deviation > ORTHOGONALITY_TOL || !deviation.is_finite() {
        return Err(Error::NotOrthogonal { deviation });
    }
    Ok(())
}

/// Replaces every pixel `M` by `T M T⁻¹` for an orthogonal `T`.
pub fn conjugate_image(img: &MuellerImage, t_p: &Mat4) -> Result<MuellerImage, Error> {
    check_orthogonal(t_p)?;
    if *t_p == Mat4::IDENTITY {
        return Ok(img.clone());
    }
    let t = *t_p;
    Ok(img.map(move |m| m.conjugate_orthogonal(&t)))
}
