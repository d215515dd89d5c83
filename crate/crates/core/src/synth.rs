//! Synthetic scenes and calibrations for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::decompose::{make_linear_retarder, random_physical_mueller_with, wrap_half_turn};
use crate::image::{AzimuthMap, IntensityStack, MuellerImage, ScalarMap};
use crate::linalg::Mat4;
use crate::transforms::{image_center, tetrahedral_analyzer, CalibrationPair};
use crate::Error;

/// Polar angle of pixel `(y, x)` about the image center, counter-clockwise on
/// screen from `+x`, reduced into `[0, π)`.
pub fn radial_azimuth(y: usize, x: usize, height: usize, width: usize) -> f64 {
    let c = image_center(height, width);
    wrap_half_turn((-(y as f64 - c.y)).atan2(x as f64 - c.x))
}

/// Ground-truth map of [`radial_scene`].
pub fn radial_azimuth_map(height: usize, width: usize) -> Result<AzimuthMap, Error> {
    let values = (0..height * width).map(|i| radial_azimuth(i / width, i % width, height, width)).collect();
    ScalarMap::new(height, width, values)
}

/// Linear retarders of retardance `delta` whose fast axis points away from
/// the image center.
pub fn radial_scene(height: usize, width: usize, delta: f64) -> Result<MuellerImage, Error> {
    MuellerImage::from_fn(height, width, |y, x| make_linear_retarder(radial_azimuth(y, x, height, width), delta))
}

pub fn constant_scene(height: usize, width: usize, phi: f64, delta: f64) -> Result<MuellerImage, Error> {
    MuellerImage::filled(height, width, make_linear_retarder(phi, delta))
}

/// Independent random admissible matrices, one per pixel, from a single
/// `ChaCha8Rng` stream in row-major order.
pub fn random_physical_scene(height: usize, width: usize, seed: u64) -> Result<MuellerImage, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = (0..height * width).map(|_| random_physical_mueller_with(&mut rng)).collect();
    MuellerImage::new(height, width, pixels)
}

fn perturbed(base: &Mat4, scale: f64, rng: &mut impl Rng) -> Mat4 {
    let mut m = *base;
    for v in m.0.iter_mut().flatten() {
        *v += scale * rng.sample::<f64, _>(StandardNormal);
    }
    m
}

/// Per-pixel calibration near the tetrahedral analyzer (and its transpose as
/// modulator), each element perturbed by `N(0, 0.05²)`.
pub fn random_calibration(height: usize, width: usize, seed: u64) -> Result<CalibrationPair, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a0 = tetrahedral_analyzer();
    let w0 = a0.transpose();
    let n = height * width;
    let analyzer: Vec<Mat4> = (0..n).map(|_| perturbed(&a0, 0.05, &mut rng)).collect();
    let modulator: Vec<Mat4> = (0..n).map(|_| perturbed(&w0, 0.05, &mut rng)).collect();
    CalibrationPair::per_pixel(MuellerImage::new(height, width, analyzer)?, MuellerImage::new(height, width, modulator)?)
}

/// Raw intensities `B = A · M · W` for a Mueller image and calibration.
pub fn forward_intensities(m: &MuellerImage, cal: &CalibrationPair) -> Result<IntensityStack, Error> {
    cal.check_dims(m.dims())?;
    let pixels = m
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, mi)| {
            let (a, w) = cal.at(i);
            a * *mi * w
        })
        .collect();
    MuellerImage::new(m.height(), m.width(), pixels)
}
