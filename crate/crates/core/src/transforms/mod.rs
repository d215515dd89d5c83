//! Spatial and polarimetric isometries and their joint application.

mod augment;
mod calibration;
mod polar;
mod policy;
mod spatial;

pub use augment::{augment, augment_mueller, augment_raw, augment_spatial_only, AugmentInput, AugmentSpec};
pub use calibration::{compute_mueller, embed_calibration, tetrahedral_analyzer, Arity, CalibrationPair};
pub use polar::{conjugate_image, polar_flip_axis_aligned, polar_flip_matrix, polar_rotation_matrix, ORTHOGONALITY_TOL};
pub use policy::{gaussian_noise, sample_spec, AugmentPolicy, RNG_ALGORITHM};
pub use spatial::{
    forward_map, image_center, resample, resample_with, spatial_flip_matrix, spatial_rotation_matrix, FlipKind,
    Interpolation, Padding,
};
