//! Physically consistent rotations and flips of Mueller matrix images.
//!
//! A spatial isometry applied to a polarimetric image only describes a
//! rotated or mirrored sample if every pixel's Mueller matrix is also
//! transformed into the new instrument frame. This crate pairs the two:
//!
//! * [`transforms`] resamples pixel grids, conjugates Mueller matrices by the
//!   matching polarimetric change of basis, and can alternatively fold the
//!   change of basis into the polarimeter calibration matrices so that raw
//!   intensities stay untouched.
//! * [`decompose`] provides the Lu–Chipman polar decomposition, azimuth and
//!   linear retardance maps, an admissibility test on the coherency matrix,
//!   and synthetic Mueller generators.
//! * [`metrics`] compares azimuth maps and summarizes admissibility before
//!   and after a transform.
//! * [`io`] reads and writes NPY arrays and the `MMPI` container, and renders
//!   azimuth maps to PNG.
//! * [`synth`] builds synthetic scenes and calibrations.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod decompose;
mod error;
pub mod image;
pub mod io;
pub mod linalg;
pub mod metrics;
mod par;
pub mod synth;
pub mod transforms;

pub use error::Error;
pub use image::{AzimuthMap, IntensityStack, Mask, MatrixImage, MuellerImage, RetardanceMap, ScalarMap};
pub use linalg::{Mat2, Mat3, Mat4, Vec2};
