//! Scalar maps derived from the retardance factor.

use std::f64::consts::PI;

use crate::decompose::lu_chipman::{lu_chipman, PolarDecomposition};
use crate::decompose::DecomposeError;
use crate::image::{AzimuthMap, MuellerImage, RetardanceMap, ScalarMap};
use crate::linalg::Mat4;
use crate::par;

/// Below this magnitude of both `R(2,4)` and `R(4,3)` the azimuth is undefined.
pub const AZIMUTH_EPS: f64 = 1e-12;

/// Reduces an angle into `[0, π)`.
pub fn wrap_half_turn(angle: f64) -> f64 {
    let a = angle.rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// Optical-axis azimuth `½ atan2(R(2,4), R(4,3))`, reduced into `[0, π)`.
pub fn azimuth(r: &Mat4) -> Result<f64, DecomposeError> {
    let (num, den) = (r.at(2, 4), r.at(4, 3));
    if num.abs() < AZIMUTH_EPS && den.abs() < AZIMUTH_EPS {
        return Err(DecomposeError::Indeterminate);
    }
    Ok(wrap_half_turn(0.5 * num.atan2(den)))
}

/// `P = (R(2,2) + R(3,3))² + (R(3,2) - R(2,3))²`.
pub fn retardance_invariant(r: &Mat4) -> f64 {
    (r.at(2, 2) + r.at(3, 3)).powi(2) + (r.at(3, 2) - r.at(2, 3)).powi(2)
}

/// Linear retardance `arccos(√P - 1)`, with the argument clamped to `[-1, 1]`.
pub fn linear_retardance(r: &Mat4) -> f64 {
    (retardance_invariant(r).sqrt() - 1.0).clamp(-1.0, 1.0).acos()
}

/// `(φ + θ) mod π` per pixel; NaN stays NaN.
pub fn theta_offset_azimuth(map: &AzimuthMap, theta: f64) -> AzimuthMap {
    map.map(|phi| if phi.is_nan() { phi } else { wrap_half_turn(phi + theta) })
}

/// Per-pixel decomposition results for a whole image.
#[derive(Debug, Clone)]
pub struct DecompositionMaps {
    pub azimuth: AzimuthMap,
    pub retardance: RetardanceMap,
    /// Pixels whose Lu–Chipman decomposition failed (both maps NaN there).
    pub failed: usize,
    /// Pixels with a valid decomposition but no defined azimuth.
    pub indeterminate: usize,
    /// The factors, when requested; `None` entries mark failed pixels.
    pub factors: Option<Vec<Option<PolarDecomposition>>>,
}

/// Decomposes every pixel. Failures never abort the map: they are counted
/// and marked with NaN.
pub fn decompose_image(img: &MuellerImage, keep_factors: bool) -> DecompositionMaps {
    let results = par::map_pixels(img.pixels(), |m| lu_chipman(m).ok());
    let mut az = Vec::with_capacity(results.len());
    let mut ret = Vec::with_capacity(results.len());
    let (mut failed, mut indeterminate) = (0, 0);
    for r in &results {
        match r {
            Some(f) => {
                ret.push(linear_retardance(&f.retarder));
                match azimuth(&f.retarder) {
                    Ok(phi) => az.push(phi),
                    Err(_) => {
                        indeterminate += 1;
                        az.push(f64::NAN);
                    }
                }
            }
            None => {
                failed += 1;
                az.push(f64::NAN);
                ret.push(f64::NAN);
            }
        }
    }
    let (h, w) = img.dims();
    DecompositionMaps {
        azimuth: ScalarMap::new(h, w, az).expect("dims come from a valid image"),
        retardance: ScalarMap::new(h, w, ret).expect("dims come from a valid image"),
        failed,
        indeterminate,
        factors: keep_factors.then_some(results),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::generators::make_linear_retarder;
    use crate::transforms::polar_rotation_matrix;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_retardance_is_zero() {
        assert_eq!(retardance_invariant(&Mat4::IDENTITY), 4.0);
        assert_eq!(linear_retardance(&Mat4::IDENTITY), 0.0);
        assert!(matches!(azimuth(&Mat4::IDENTITY), Err(DecomposeError::Indeterminate)));
    }

    #[test]
    fn quarter_wave_retardance() {
        let r = make_linear_retarder(0.0, FRAC_PI_2);
        assert!((retardance_invariant(&r) - 1.0).abs() < 1e-15);
        assert!((linear_retardance(&r) - FRAC_PI_2).abs() < 1e-12);
        assert_eq!(azimuth(&r).unwrap(), 0.0);
    }

    #[test]
    fn rounding_above_four_is_clamped() {
        let mut r = Mat4::IDENTITY;
        r.0[1][1] = 1.0 + 1e-13;
        assert!(retardance_invariant(&r) > 4.0);
        assert_eq!(linear_retardance(&r), 0.0);
    }

    #[test]
    fn theta_offset_wraps() {
        let map = ScalarMap::new(1, 3, vec![170f64.to_radians(), f64::NAN, 0.3]).unwrap();
        let out = theta_offset_azimuth(&map, 20f64.to_radians());
        assert!((out.values()[0] - 10f64.to_radians()).abs() < 1e-12);
        assert!(out.values()[1].is_nan());
        assert_eq!(theta_offset_azimuth(&map, 0.0).values()[2], 0.3);
        let back = theta_offset_azimuth(&out, -20f64.to_radians());
        assert!((back.values()[0] - map.values()[0]).abs() < 1e-12);
    }

    #[test]
    fn identity_image_maps() {
        let img = MuellerImage::filled(2, 3, Mat4::IDENTITY).unwrap();
        let maps = decompose_image(&img, true);
        assert!(maps.azimuth.values().iter().all(|v| v.is_nan()));
        assert!(maps.retardance.values().iter().all(|&v| v == 0.0));
        assert_eq!((maps.failed, maps.indeterminate), (0, 6));
        assert_eq!(maps.factors.unwrap().len(), 6);
    }

    #[test]
    fn failed_pixels_are_nan() {
        let img = MuellerImage::new(1, 2, vec![Mat4::ZERO, Mat4::IDENTITY]).unwrap();
        let maps = decompose_image(&img, false);
        assert_eq!(maps.failed, 1);
        assert!(maps.retardance.values()[0].is_nan());
    }

    proptest! {
        #[test]
        fn azimuth_is_equivariant(phi in 0.0f64..PI, delta in 0.05f64..3.09, theta in -7.0f64..7.0) {
            let m = make_linear_retarder(phi, delta).conjugate_orthogonal(&polar_rotation_matrix(theta));
            let r = lu_chipman(&m).unwrap().retarder;
            let got = azimuth(&r).unwrap();
            let expected = wrap_half_turn(phi + theta);
            let diff = (got - expected).abs();
            prop_assert!(diff.min(PI - diff) <= 1e-9);
        }

        #[test]
        fn retardance_is_rotation_invariant(phi in 0.0f64..PI, delta in 0.05f64..3.09, theta in -7.0f64..7.0) {
            let m = make_linear_retarder(phi, delta);
            let rotated = m.conjugate_orthogonal(&polar_rotation_matrix(theta));
            let a = linear_retardance(&lu_chipman(&m).unwrap().retarder);
            let b = linear_retardance(&lu_chipman(&rotated).unwrap().retarder);
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
