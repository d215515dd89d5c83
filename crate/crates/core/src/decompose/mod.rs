//! Polar decomposition, derived scalar maps, admissibility and synthetic
//! generators.

use thiserror::Error;

mod coherency;
mod generators;
mod lu_chipman;
mod maps;

pub use coherency::{coherency, is_admissible, mueller_from_coherency, CoherencyMatrix, ADMISSIBILITY_TOL};
pub use generators::{make_diattenuator, make_linear_retarder, random_physical_mueller, random_physical_mueller_with};
pub use lu_chipman::{lu_chipman, PolarDecomposition, DEPOLARIZER_EPS, DIATTENUATION_MARGIN};
pub use maps::{
    azimuth, decompose_image, linear_retardance, retardance_invariant, theta_offset_azimuth, wrap_half_turn,
    DecompositionMaps, AZIMUTH_EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DecomposeError {
    #[error("m11 = {m11} is not positive")]
    NonPositiveIntensity { m11: f64 },
    #[error("diattenuation magnitude {magnitude} is not below 1")]
    DegenerateDiattenuation { magnitude: f64 },
    #[error("depolarizer is singular (smallest eigenvalue of m'm'ᵀ = {smallest_eigenvalue:e})")]
    SingularDepolarizer { smallest_eigenvalue: f64 },
    #[error("azimuth is indeterminate (no linear retardance)")]
    Indeterminate,
}
