use std::f64::consts::{FRAC_PI_2, PI};

use polaraug::decompose::{decompose_image, is_admissible, ADMISSIBILITY_TOL};
use polaraug::metrics::wrapped_error;
use polaraug::synth::{constant_scene, forward_intensities, random_physical_scene};
use polaraug::transforms::{
    augment_mueller, augment_raw, compute_mueller, tetrahedral_analyzer, AugmentSpec, CalibrationPair, Interpolation,
    Padding,
};
use polaraug::{Mat4, MatrixImage};
use proptest::prelude::*;

fn max_diff(a: &MatrixImage, b: &MatrixImage) -> f64 {
    a.pixels().iter().zip(b.pixels()).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

fn spec_strategy() -> impl Strategy<Value = AugmentSpec> {
    (-PI..PI, any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(theta, fh, fv, bilinear, mirror)| {
        AugmentSpec::rotation(theta)
            .with_flips(fh, fv)
            .with_interpolation(if bilinear { Interpolation::Bilinear } else { Interpolation::Nearest })
            .with_padding(if mirror { Padding::Mirror } else { Padding::IdentityFill })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn raw_path_with_global_calibration_matches_mueller_path(spec in spec_strategy(), seed in 0u64..1000) {
        let m = random_physical_scene(12, 9, seed).unwrap();
        let a = tetrahedral_analyzer();
        let cal = CalibrationPair::global(a, a.transpose());
        let b = forward_intensities(&m, &cal).unwrap();
        let (b2, cal2) = augment_raw(&b, &cal, &spec).unwrap();
        let direct = augment_mueller(&compute_mueller(&b, &cal).unwrap(), &spec).unwrap();
        prop_assert!(max_diff(&compute_mueller(&b2, &cal2).unwrap(), &direct) <= 1e-10);
    }

    #[test]
    fn augmentation_keeps_physical_pixels_physical(spec in spec_strategy(), seed in 0u64..1000) {
        let m = random_physical_scene(10, 10, seed).unwrap();
        let out = augment_mueller(&m, &spec).unwrap();
        prop_assert!(out.pixels().iter().all(|p| is_admissible(p, ADMISSIBILITY_TOL)));
    }

    #[test]
    fn constant_scene_azimuth_follows_rotation(phi in 0.0..PI, delta in 0.2..3.0, theta in -PI..PI) {
        let scene = constant_scene(9, 9, phi, delta).unwrap();
        let out = augment_mueller(&scene, &AugmentSpec::rotation(theta)).unwrap();
        let maps = decompose_image(&out, false);
        let center = maps.azimuth.get(4, 4);
        prop_assert!(wrapped_error(center, phi + theta) < 1e-9, "{center} vs {}", phi + theta);
        prop_assert!((maps.retardance.get(4, 4) - delta).abs() < 1e-9);
    }

    #[test]
    fn flipping_twice_restores_the_image(seed in 0u64..1000, fh in any::<bool>(), fv in any::<bool>()) {
        let m = random_physical_scene(7, 11, seed).unwrap();
        let spec = AugmentSpec::identity().with_flips(fh, fv).with_interpolation(Interpolation::Nearest);
        let twice = augment_mueller(&augment_mueller(&m, &spec).unwrap(), &spec).unwrap();
        prop_assert!(max_diff(&twice, &m) <= 1e-12);
    }
}

#[test]
fn four_quarter_turns_are_the_identity() {
    let m = random_physical_scene(8, 8, 3).unwrap();
    let spec = AugmentSpec::rotation(FRAC_PI_2).with_interpolation(Interpolation::Nearest);
    let mut img = m.clone();
    for _ in 0..4 {
        img = augment_mueller(&img, &spec).unwrap();
    }
    assert!(max_diff(&img, &m) <= 1e-12);
}

#[test]
fn identity_fill_marks_pixels_outside_the_source() {
    let m = MatrixImage::filled(16, 16, Mat4::from_diag([1.0, 0.5, 0.5, 0.5])).unwrap();
    let out = augment_mueller(&m, &AugmentSpec::rotation(PI / 4.0).with_interpolation(Interpolation::Nearest)).unwrap();
    assert_eq!(*out.get(0, 0), Mat4::IDENTITY);
    assert_eq!(*out.get(8, 8), Mat4::from_diag([1.0, 0.5, 0.5, 0.5]));
}
