//! Azimuth map comparison, retardance masking and admissibility reports.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decompose::is_admissible;
use crate::image::{AzimuthMap, Mask, MuellerImage, RetardanceMap};
use crate::linalg::Mat4;
use crate::transforms::AugmentSpec;
use crate::Error;

/// Mean of a per-pixel error over the usable pixels of a mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaeSummary {
    /// Mean error in radians.
    pub mean: f64,
    /// Pixels that entered the mean.
    pub used: usize,
    /// Masked-in pixels skipped because either map was NaN.
    pub nan_excluded: usize,
}

impl MaeSummary {
    pub fn mean_degrees(&self) -> f64 {
        self.mean.to_degrees()
    }
}

fn masked_mean(
    pred: &AzimuthMap,
    gt: &AzimuthMap,
    mask: &Mask,
    per_pixel: impl Fn(f64, f64) -> f64,
) -> Result<MaeSummary, Error> {
    if pred.dims() != gt.dims() {
        return Err(Error::DimensionMismatch { expected: gt.dims(), found: pred.dims() });
    }
    if mask.dims() != gt.dims() {
        return Err(Error::DimensionMismatch { expected: gt.dims(), found: mask.dims() });
    }
    let (mut sum, mut used, mut nan_excluded) = (0.0, 0usize, 0usize);
    for ((&p, &g), &keep) in pred.values().iter().zip(gt.values()).zip(mask.values()) {
        if !keep {
            continue;
        }
        if p.is_nan() || g.is_nan() {
            nan_excluded += 1;
            continue;
        }
        sum += per_pixel(p, g);
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(MaeSummary { mean: sum / used as f64, used, nan_excluded })
}

/// Per-pixel cyclic azimuth error `min(|φ' - φ_g|, |φ - φ_g|)` with the
/// reflection `φ' = π - φ`.
pub fn cyclic_error(phi: f64, gt: f64) -> f64 {
    ((PI - phi) - gt).abs().min((phi - gt).abs())
}

/// Per-pixel wrap-around distance on the half-turn circle, in `[0, π/2]`.
pub fn wrapped_error(phi: f64, gt: f64) -> f64 {
    let d = (phi - gt).rem_euclid(PI);
    d.min(PI - d)
}

/// Mean of [`cyclic_error`] over masked pixels.
pub fn cyclic_mae(pred: &AzimuthMap, gt: &AzimuthMap, mask: &Mask) -> Result<MaeSummary, Error> {
    masked_mean(pred, gt, mask, cyclic_error)
}

/// Mean of [`wrapped_error`] over masked pixels.
pub fn wrapped_mae(pred: &AzimuthMap, gt: &AzimuthMap, mask: &Mask) -> Result<MaeSummary, Error> {
    masked_mean(pred, gt, mask, wrapped_error)
}

/// Percentile of the non-NaN values with linear interpolation between order
/// statistics. `None` when every value is NaN.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return None;
    }
    sorted.sort_by(f64::total_cmp);
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

pub const DEFAULT_MASK_PERCENTILE: f64 = 75.0;

/// Keeps the pixels whose retardance is at or above the given percentile.
/// NaN pixels are always excluded.
pub fn retardance_mask(delta: &RetardanceMap, pct: f64) -> Result<Mask, Error> {
    if !(0.0..=100.0).contains(&pct) {
        return Err(Error::InvalidArgument(format!("percentile {pct} outside [0, 100]")));
    }
    let (h, w) = delta.dims();
    let values = match percentile(delta.values(), pct) {
        Some(threshold) => delta.values().iter().map(|&v| v >= threshold).collect(),
        None => vec![false; h * w],
    };
    Mask::new(h, w, values)
}

/// Outcome of checking admissibility at corresponding pixel pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub n_sampled: usize,
    pub n_excluded_out_of_fov: usize,
    pub n_valid_pairs: usize,
    pub n_admissible_both: usize,
    pub n_became_inadmissible: usize,
    /// Valid pairs that were already inadmissible before the transform.
    pub n_inadmissible_before: usize,
    /// `n_admissible_both / n_valid_pairs`; NaN without valid pairs.
    pub accuracy: f64,
}

impl AdmissibilityReport {
    fn from_counts(n_sampled: usize, excluded: usize, both: usize, became: usize, before_bad: usize) -> Self {
        let valid = n_sampled - excluded;
        debug_assert_eq!(valid, both + became + before_bad);
        let accuracy = if valid == 0 { f64::NAN } else { both as f64 / valid as f64 };
        Self {
            n_sampled,
            n_excluded_out_of_fov: excluded,
            n_valid_pairs: valid,
            n_admissible_both: both,
            n_became_inadmissible: became,
            n_inadmissible_before: before_bad,
            accuracy,
        }
    }

    /// Sums the counts of several reports and recomputes the accuracy.
    pub fn merge(reports: &[AdmissibilityReport]) -> Self {
        let sum = |f: fn(&AdmissibilityReport) -> usize| reports.iter().map(f).sum::<usize>();
        Self::from_counts(
            sum(|r| r.n_sampled),
            sum(|r| r.n_excluded_out_of_fov),
            sum(|r| r.n_admissible_both),
            sum(|r| r.n_became_inadmissible),
            sum(|r| r.n_inadmissible_before),
        )
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_sampled={}", self.n_sampled);
        let _ = writeln!(s, "n_excluded_out_of_fov={}", self.n_excluded_out_of_fov);
        let _ = writeln!(s, "n_valid_pairs={}", self.n_valid_pairs);
        let _ = writeln!(s, "n_admissible_both={}", self.n_admissible_both);
        let _ = writeln!(s, "n_became_inadmissible={}", self.n_became_inadmissible);
        let _ = writeln!(s, "n_inadmissible_before={}", self.n_inadmissible_before);
        let _ = writeln!(s, "accuracy={}", fmt_float(self.accuracy));
        s
    }

    /// JSON object; a NaN accuracy is written as `null`.
    pub fn to_json(&self) -> String {
        let accuracy = if self.accuracy.is_finite() { fmt_float(self.accuracy) } else { "null".to_string() };
        format!(
            "{{\"n_sampled\":{},\"n_excluded_out_of_fov\":{},\"n_valid_pairs\":{},\"n_admissible_both\":{},\
             \"n_became_inadmissible\":{},\"n_inadmissible_before\":{},\"accuracy\":{}}}",
            self.n_sampled,
            self.n_excluded_out_of_fov,
            self.n_valid_pairs,
            self.n_admissible_both,
            self.n_became_inadmissible,
            self.n_inadmissible_before,
            accuracy
        )
    }
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

/// Samples `n_samples` pixel coordinates of `before` (uniform, with
/// replacement, `ChaCha8Rng` seeded by `seed`) and compares admissibility at
/// the pixel `correspond` maps each one to in `after`.
///
/// A pair is excluded as out of field of view when the correspondence leaves
/// the grid or either matrix is exactly the identity fill value.
pub fn admissibility_report_with(
    before: &MuellerImage,
    after: &MuellerImage,
    n_samples: usize,
    seed: u64,
    tol: f64,
    correspond: impl Fn(usize, usize) -> Option<(usize, usize)>,
) -> Result<AdmissibilityReport, Error> {
    if before.dims() != after.dims() {
        return Err(Error::DimensionMismatch { expected: before.dims(), found: after.dims() });
    }
    let (h, w) = before.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut excluded, mut both, mut became, mut before_bad) = (0, 0, 0, 0);
    for _ in 0..n_samples {
        let y = rng.random_range(0..h);
        let x = rng.random_range(0..w);
        let Some((ya, xa)) = correspond(y, x) else {
            excluded += 1;
            continue;
        };
        let (mb, ma) = (before.get(y, x), after.get(ya, xa));
        if *mb == Mat4::IDENTITY || *ma == Mat4::IDENTITY {
            excluded += 1;
            continue;
        }
        match (is_admissible(mb, tol), is_admissible(ma, tol)) {
            (true, true) => both += 1,
            (true, false) => became += 1,
            (false, _) => before_bad += 1,
        }
    }
    Ok(AdmissibilityReport::from_counts(n_samples, excluded, both, became, before_bad))
}

/// [`admissibility_report_with`] for images whose pixels correspond one to one.
pub fn admissibility_report(
    before: &MuellerImage,
    after: &MuellerImage,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AdmissibilityReport, Error> {
    admissibility_report_with(before, after, n_samples, seed, tol, |y, x| Some((y, x)))
}

/// [`admissibility_report_with`] where `after` is `before` augmented by `spec`.
pub fn admissibility_report_for_spec(
    before: &MuellerImage,
    after: &MuellerImage,
    spec: &AugmentSpec,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AdmissibilityReport, Error> {
    let (h, w) = before.dims();
    admissibility_report_with(before, after, n_samples, seed, tol, |y, x| spec.map_pixel(y, x, h, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{random_physical_mueller, ADMISSIBILITY_TOL};
    use crate::image::ScalarMap;
    use proptest::prelude::*;

    fn constant(h: usize, w: usize, v: f64) -> ScalarMap {
        ScalarMap::filled(h, w, v).unwrap()
    }

    #[test]
    fn identical_maps_have_zero_error() {
        let a = ScalarMap::new(1, 4, vec![0.1, 1.0, 2.0, 3.0]).unwrap();
        let mask = Mask::all(1, 4);
        assert_eq!(cyclic_mae(&a, &a, &mask).unwrap().mean, 0.0);
        assert_eq!(wrapped_mae(&a, &a, &mask).unwrap().mean, 0.0);
    }

    #[test]
    fn reflection_matches_ten_vs_one_seventy() {
        let p = constant(2, 2, 10f64.to_radians());
        let g = constant(2, 2, 170f64.to_radians());
        let mae = cyclic_mae(&p, &g, &Mask::all(2, 2)).unwrap();
        assert!(mae.mean.abs() < 1e-12);
    }

    #[test]
    fn reflection_and_wrap_disagree() {
        // φ = 0.05, φ_g = 3.10: the reflection gives |π - 0.05 - 3.10|, the
        // circular distance gives π - 3.05.
        assert!((cyclic_error(0.05, 3.10) - (PI - 3.15).abs()).abs() < 1e-15);
        assert!((cyclic_error(0.05, 3.10) - 0.0084073).abs() < 1e-6);
        assert!((wrapped_error(0.05, 3.10) - (PI - 3.05)).abs() < 1e-15);
        assert!((wrapped_error(0.05, 3.10) - 0.0915927).abs() < 1e-6);
    }

    #[test]
    fn nan_pixels_are_counted() {
        let p = ScalarMap::new(1, 3, vec![0.1, f64::NAN, 0.3]).unwrap();
        let g = constant(1, 3, 0.1);
        let mae = wrapped_mae(&p, &g, &Mask::all(1, 3)).unwrap();
        assert_eq!((mae.used, mae.nan_excluded), (2, 1));
        assert!((mae.mean - 0.1).abs() < 1e-15);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let a = constant(2, 2, 0.2);
        let mask = Mask::new(2, 2, vec![false; 4]).unwrap();
        assert!(matches!(cyclic_mae(&a, &a, &mask), Err(Error::EmptyMask)));
        let nan = constant(2, 2, f64::NAN);
        assert!(matches!(wrapped_mae(&nan, &a, &Mask::all(2, 2)), Err(Error::EmptyMask)));
    }

    #[test]
    fn dims_must_match() {
        let a = constant(2, 2, 0.2);
        let b = constant(2, 3, 0.2);
        assert!(cyclic_mae(&a, &b, &Mask::all(2, 2)).is_err());
    }

    #[test]
    fn percentile_mask_examples() {
        let d = ScalarMap::new(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(percentile(d.values(), 75.0), Some(3.25));
        assert_eq!(retardance_mask(&d, 75.0).unwrap().values(), &[false, false, false, true]);
        assert_eq!(retardance_mask(&d, 0.0).unwrap().count(), 4);
        assert_eq!(retardance_mask(&constant(3, 3, 0.7), 75.0).unwrap().count(), 9);
        assert!(retardance_mask(&d, 101.0).is_err());
        let with_nan = ScalarMap::new(1, 3, vec![f64::NAN, 1.0, 2.0]).unwrap();
        assert_eq!(retardance_mask(&with_nan, 0.0).unwrap().values(), &[false, true, true]);
    }

    #[test]
    fn identical_images_are_fully_admissible() {
        let img = MuellerImage::from_fn(8, 8, |y, x| random_physical_mueller((y * 8 + x) as u64)).unwrap();
        let r = admissibility_report(&img, &img, 100, 1, ADMISSIBILITY_TOL).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.n_valid_pairs, 100);
        assert_eq!(r.n_valid_pairs, r.n_admissible_both + r.n_became_inadmissible + r.n_inadmissible_before);
    }

    #[test]
    fn identity_pixels_are_excluded() {
        let img = MuellerImage::filled(4, 4, Mat4::IDENTITY).unwrap();
        let r = admissibility_report(&img, &img, 50, 2, ADMISSIBILITY_TOL).unwrap();
        assert_eq!(r.n_excluded_out_of_fov, 50);
        assert!(r.accuracy.is_nan());
        assert!(r.to_json().contains("\"accuracy\":null"));
    }

    #[test]
    fn report_serializations() {
        let r = AdmissibilityReport::from_counts(10, 2, 7, 1, 0);
        assert_eq!(r.accuracy, 0.875);
        let kv = r.to_key_value();
        assert!(kv.contains("n_valid_pairs=8\n") && kv.contains("accuracy=0.875\n"));
        let json = r.to_json();
        assert!(json.starts_with('{') && json.contains("\"n_admissible_both\":7"));
        let merged = AdmissibilityReport::merge(&[r, r]);
        assert_eq!(merged.n_sampled, 20);
        assert_eq!(merged.accuracy, 0.875);
    }

    proptest! {
        #[test]
        fn wrapped_error_is_bounded(p in 0.0f64..PI, g in 0.0f64..PI) {
            let e = wrapped_error(p, g);
            prop_assert!((0.0..=PI / 2.0 + 1e-15).contains(&e));
            prop_assert!((e - wrapped_error(g, p)).abs() < 1e-12);
            let c = cyclic_error(p, g);
            prop_assert!((0.0..PI).contains(&c));
        }

        #[test]
        fn higher_percentile_gives_subset(values in proptest::collection::vec(0.0f64..3.0, 1..64), a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let n = values.len();
            let d = ScalarMap::new(1, n, values).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let m_lo = retardance_mask(&d, lo).unwrap();
            let m_hi = retardance_mask(&d, hi).unwrap();
            prop_assert!(m_hi.is_subset_of(&m_lo));
            prop_assert!(m_hi.count() >= 1);
        }
    }
}
