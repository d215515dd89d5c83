//! Synthetic Mueller matrices with known properties.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::decompose::coherency::{mueller_from_coherency, CoherencyMatrix};
use crate::decompose::lu_chipman::diattenuator_from_vector;
use crate::linalg::Mat4;
use crate::transforms::polar_rotation_matrix;

/// Axis-aligned linear retarder with retardance `delta`. The lower 3×3 block
/// rotates `S₂` towards `S₃`, which makes its azimuth `0` under
/// [`azimuth`](crate::decompose::azimuth).
fn axis_aligned_retarder(delta: f64) -> Mat4 {
    let (s, c) = delta.sin_cos();
    Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, c, -s],
        [0.0, 0.0, s, c],
    ])
}

/// Linear retarder with fast-axis azimuth `phi` and retardance `delta`,
/// `R_p(φ) · Ret₀(δ) · R_p(-φ)`.
pub fn make_linear_retarder(phi: f64, delta: f64) -> Mat4 {
    let r = polar_rotation_matrix(phi);
    r * axis_aligned_retarder(delta) * r.transpose()
}

/// Ideal linear diattenuator with diattenuation `d ∈ [0, 1)` oriented at `phi`.
pub fn make_diattenuator(d: f64, phi: f64) -> Mat4 {
    let (s, c) = (2.0 * phi).sin_cos();
    diattenuator_from_vector(1.0, [d * c, d * s, 0.0])
}

/// Random admissible Mueller matrix with `m_11 = 1`, drawn from a Gram
/// coherency matrix of four standard complex Gaussian vectors.
pub fn random_physical_mueller(seed: u64) -> Mat4 {
    random_physical_mueller_with(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_physical_mueller_with(rng: &mut impl Rng) -> Mat4 {
    let mut vectors = [[Complex64::new(0.0, 0.0); 4]; 4];
    for v in vectors.iter_mut() {
        for z in v.iter_mut() {
            *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for v in &vectors {
        for i in 0..4 {
            for j in 0..4 {
                h[i][j] += v[i] * v[j].conj();
            }
        }
    }
    let trace: f64 = (0..4).map(|i| h[i][i].re).sum();
    h.iter_mut().flatten().for_each(|z| *z /= trace);
    let mut m = mueller_from_coherency(&CoherencyMatrix(h));
    m.0[0][0] = 1.0;
    m
}
