//! Stochastic augmentation policy and the additive Gaussian noise baseline.
//!
//! All randomness comes from `ChaCha8Rng` (crate `rand_chacha` 0.9) seeded
//! with `SeedableRng::seed_from_u64(seed)`. [`sample_spec`] draws exactly four
//! values in a fixed order: the rotation trigger, the angle, the horizontal
//! flip trigger and the vertical flip trigger.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::image::MuellerImage;
use crate::linalg::Mat4;
use crate::transforms::augment::AugmentSpec;
use crate::transforms::spatial::{Interpolation, Padding};
use crate::Error;

/// Identifier of the random stream used by the policy and the noise model.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentPolicy {
    pub p_rotation: f64,
    pub p_flip_h: f64,
    pub p_flip_v: f64,
    /// Half-open angle interval `[lo, hi)` in radians.
    pub angle_range: (f64, f64),
    pub padding: Padding,
    pub interpolation: Interpolation,
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        Self {
            p_rotation: 0.5,
            p_flip_h: 0.25,
            p_flip_v: 0.25,
            angle_range: (-FRAC_PI_4, FRAC_PI_4),
            padding: Padding::default(),
            interpolation: Interpolation::default(),
        }
    }
}

impl AugmentPolicy {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, p) in [("p_rotation", self.p_rotation), ("p_flip_h", self.p_flip_h), ("p_flip_v", self.p_flip_v)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
            }
        }
        let (lo, hi) = self.angle_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("empty angle range [{lo}, {hi})")));
        }
        Ok(())
    }
}

/// Draws one augmentation from `policy`. Deterministic in `seed`.
pub fn sample_spec(policy: &AugmentPolicy, seed: u64) -> AugmentSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rotate = rng.random::<f64>() < policy.p_rotation;
    let (lo, hi) = policy.angle_range;
    let angle = rng.random_range(lo..hi);
    let flip_h = rng.random::<f64>() < policy.p_flip_h;
    let flip_v = rng.random::<f64>() < policy.p_flip_v;
    AugmentSpec {
        rotation: if rotate { angle } else { 0.0 },
        flip_h,
        flip_v,
        padding: policy.padding,
        interpolation: policy.interpolation,
        seed,
    }
}

/// Adds independent `N(0, sigma²)` noise to every Mueller element.
pub fn gaussian_noise(img: &MuellerImage, sigma: f64, seed: u64) -> Result<MuellerImage, Error> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("noise sigma {sigma} must be finite and non-negative")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|m| {
            let mut out = *m;
            out.0.iter_mut().flatten().for_each(|v| *v += normal.sample(&mut rng));
            out
        })
        .collect::<Vec<Mat4>>();
    MuellerImage::new(img.height(), img.width(), pixels)
}
