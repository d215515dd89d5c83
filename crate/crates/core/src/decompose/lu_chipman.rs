//! Lu–Chipman polar decomposition `M = Δ · R · D`.

use serde::Serialize;

use crate::decompose::DecomposeError;
use crate::linalg::{sym3_eig, Mat3, Mat4};

/// Diattenuation magnitudes at or above `1 - DIATTENUATION_MARGIN` are
/// rejected, since `D` is then singular.
pub const DIATTENUATION_MARGIN: f64 = 1e-9;
/// Smallest admissible eigenvalue of `m' m'ᵀ`.
pub const DEPOLARIZER_EPS: f64 = 1e-20;

/// Depolarizer, retarder and diattenuator factors of one Mueller matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarDecomposition {
    pub depolarizer: Mat4,
    pub retarder: Mat4,
    pub diattenuator: Mat4,
}

impl PolarDecomposition {
    pub fn reconstruct(&self) -> Mat4 {
        self.depolarizer * self.retarder * self.diattenuator
    }
}

/// Diattenuator with intensity transmittance `m11` and diattenuation vector
/// `d` (`|d| < 1`).
pub(crate) fn diattenuator_from_vector(m11: f64, d: [f64; 3]) -> Mat4 {
    let dn2 = d.iter().map(|v| v * v).sum::<f64>();
    let dn = dn2.sqrt();
    let root = (1.0 - dn2).sqrt();
    let mut lower = Mat3::IDENTITY.scale(root);
    if dn > 0.0 {
        let u = d.map(|v| v / dn);
        for i in 0..3 {
            for j in 0..3 {
                lower.0[i][j] += (1.0 - root) * u[i] * u[j];
            }
        }
    }
    Mat4::from_blocks(1.0, d, d, lower).scale(m11)
}

pub fn lu_chipman(m: &Mat4) -> Result<PolarDecomposition, DecomposeError> {
    let m11 = m.at(1, 1);
    if !(m11 > 0.0) || !m.is_finite() {
        return Err(DecomposeError::NonPositiveIntensity { m11 });
    }
    let d = [m.at(1, 2) / m11, m.at(1, 3) / m11, m.at(1, 4) / m11];
    let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if dn >= 1.0 - DIATTENUATION_MARGIN {
        return Err(DecomposeError::DegenerateDiattenuation { magnitude: dn });
    }
    let diattenuator = diattenuator_from_vector(m11, d);
    let d_inv = diattenuator
        .inverse()
        .map_err(|_| DecomposeError::DegenerateDiattenuation { magnitude: dn })?;

    // M' = M D⁻¹ = Δ R has first row (1, 0, 0, 0).
    let mp = *m * d_inv;
    let polarizance = [mp.at(2, 1), mp.at(3, 1), mp.at(4, 1)];
    let m_prime = mp.lower_block();
    let det = m_prime.det();
    let eig = sym3_eig(&(m_prime * m_prime.transpose())).map_err(|_| DecomposeError::SingularDepolarizer {
        smallest_eigenvalue: f64::NAN,
    })?;
    let smallest = eig.values[2];
    if smallest < DEPOLARIZER_EPS || det == 0.0 {
        return Err(DecomposeError::SingularDepolarizer { smallest_eigenvalue: smallest });
    }
    let sign = det.signum();
    let m_delta = eig.map_values(|l| sign * l.sqrt());
    let m_delta_inv = eig.map_values(|l| sign / l.sqrt());
    let m_retarder = m_delta_inv * m_prime;

    Ok(PolarDecomposition {
        depolarizer: Mat4::from_blocks(1.0, [0.0; 3], polarizance, m_delta),
        retarder: Mat4::from_blocks(1.0, [0.0; 3], [0.0; 3], m_retarder),
        diattenuator,
    })
}
