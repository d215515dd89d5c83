use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polaraug::decompose::{is_admissible, make_linear_retarder, ADMISSIBILITY_TOL};
use polaraug::io::{self, MmpiContainer};
use polaraug::synth::{forward_intensities, radial_azimuth_map, random_calibration, random_physical_scene};
use polaraug::transforms::{tetrahedral_analyzer, CalibrationPair};
use polaraug::{Mat4, MatrixImage, ScalarMap};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polaraug"));
    c.env_remove("POLARAUG_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn polaraug")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }
    fn p(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
    fn s(&self, name: &str) -> String {
        self.p(name).to_str().unwrap().to_string()
    }
}

fn read_image(path: &Path) -> MatrixImage {
    io::read_npy(path).unwrap().into_matrix_image().unwrap()
}

fn read_map(path: &Path) -> ScalarMap {
    io::read_npy(path).unwrap().into_scalar_map().unwrap()
}

fn write_image(path: &Path, img: &MatrixImage) {
    io::write_matrix_image_npy(path, img).unwrap();
}

fn write_map(path: &Path, map: &ScalarMap) {
    io::write_scalar_map_npy(path, map).unwrap();
}

fn assert_ok(o: &Output) {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zero_angle_reproduces_input_bytes() {
    let d = Dir::new();
    write_image(&d.p("in.npy"), &random_physical_scene(9, 7, 3).unwrap());
    let o = run(&["augment", "--input", &d.s("in.npy"), "--angle", "0", "--output", &d.s("out.npy")]);
    assert_ok(&o);
    assert_eq!(fs::read(d.p("in.npy")).unwrap(), fs::read(d.p("out.npy")).unwrap());
}

#[test]
fn random_augment_is_deterministic() {
    let d = Dir::new();
    write_image(&d.p("in.npy"), &random_physical_scene(12, 10, 1).unwrap());
    let go = |out: &str| {
        let o = run(&["augment", "--input", &d.s("in.npy"), "--random", "--seed", "42", "--output", &d.s(out)]);
        assert_ok(&o);
        stdout(&o)
    };
    let (a, b) = (go("a.npy"), go("b.npy"));
    assert_eq!(value(&a, "sha256"), value(&b, "sha256"));
    assert_eq!(fs::read(d.p("a.npy")).unwrap(), fs::read(d.p("b.npy")).unwrap());
}

// Resampling commutes with M = A⁻¹ B W⁻¹ when the calibration is global
// (the reconstruction is linear in B) or when pixels are only moved
// (nearest neighbour). Bilinear blending of per-pixel A and W does not.
#[test]
fn calibration_mode_matches_mueller_mode() {
    let d = Dir::new();
    let (h, w) = (20, 24);
    let m = random_physical_scene(h, w, 5).unwrap();
    let analyzer = tetrahedral_analyzer();
    let cases = [
        ("global", CalibrationPair::global(analyzer, analyzer.transpose()), "bilinear"),
        ("per-pixel", random_calibration(h, w, 6).unwrap(), "nearest"),
    ];
    for (name, cal, interp) in cases {
        let b = forward_intensities(&m, &cal).unwrap();
        let bundle = MmpiContainer::from_bundle(&b, &cal).unwrap();
        io::write_mmpi(d.p("raw.mmpi"), &bundle).unwrap();
        for angle in ["30", "-72.5", "90"] {
            let common = ["--input", &d.s("raw.mmpi"), "--angle", angle, "--flip-h", "--interp", interp];
            let o = bin().arg("augment").args(common).args(["--mode", "mueller", "--output", &d.s("m.npy")]).output().unwrap();
            assert_ok(&o);
            let o = bin().arg("augment").args(common).args(["--mode", "calibration", "--output", &d.s("cal.mmpi")]).output().unwrap();
            assert_ok(&o);
            let o = run(&["compute", "--input", &d.s("cal.mmpi"), "--output", &d.s("c.npy")]);
            assert_ok(&o);
            let (x, y) = (read_image(&d.p("m.npy")), read_image(&d.p("c.npy")));
            let worst = x.pixels().iter().zip(y.pixels()).map(|(p, q)| p.max_abs_diff(q)).fold(0.0, f64::max);
            assert!(worst <= 1e-10, "{name} angle {angle}: {worst:e}");
        }
    }
}

#[test]
fn calibration_directory_output() {
    let d = Dir::new();
    let o = run(&["synth", "--pattern", "radial", "--size", "9x8", "--calibration", "per-pixel", "--output", &d.s("raw")]);
    assert_ok(&o);
    let o = run(&[
        "augment",
        "--analyzer",
        &d.s("raw/analyzer.npy"),
        "--intensities",
        &d.s("raw/intensities.npy"),
        "--modulator",
        &d.s("raw/modulator.npy"),
        "--mode",
        "calibration",
        "--angle",
        "90",
        "--output",
        &d.s("cal"),
    ]);
    assert_ok(&o);
    let o = run(&[
        "compute",
        "--analyzer",
        &d.s("cal/analyzer.npy"),
        "--intensities",
        &d.s("cal/intensities.npy"),
        "--modulator",
        &d.s("cal/modulator.npy"),
        "--output",
        &d.s("c.npy"),
    ]);
    assert_ok(&o);
    assert_eq!(read_image(&d.p("c.npy")).dims(), (9, 8));
}

#[test]
fn global_calibration_writes_four_by_four_arrays() {
    let d = Dir::new();
    let o = run(&["synth", "--pattern", "constant", "--size", "6x5", "--calibration", "global", "--output", &d.s("raw")]);
    assert_ok(&o);
    let o = run(&[
        "augment",
        "--analyzer",
        &d.s("raw/analyzer.npy"),
        "--intensities",
        &d.s("raw/intensities.npy"),
        "--modulator",
        &d.s("raw/modulator.npy"),
        "--mode",
        "calibration",
        "--angle",
        "15",
        "--output",
        &d.s("out"),
    ]);
    assert_ok(&o);
    assert_eq!(io::read_npy(d.p("out/analyzer.npy")).unwrap().header.shape, vec![4, 4]);
    assert_eq!(
        fs::read(d.p("raw/intensities.npy")).unwrap().len(),
        fs::read(d.p("out/intensities.npy")).unwrap().len()
    );
}

#[test]
fn singular_calibration_exits_one() {
    let d = Dir::new();
    io::write_matrix_npy(d.p("a.npy"), &Mat4::ZERO).unwrap();
    io::write_matrix_npy(d.p("w.npy"), &Mat4::IDENTITY).unwrap();
    write_image(&d.p("b.npy"), &MatrixImage::filled(3, 3, Mat4::IDENTITY).unwrap());
    for mode in ["mueller", "calibration"] {
        let o = run(&[
            "augment",
            "--analyzer",
            &d.s("a.npy"),
            "--intensities",
            &d.s("b.npy"),
            "--modulator",
            &d.s("w.npy"),
            "--mode",
            mode,
            "--angle",
            "10",
            "--output",
            &d.s("o"),
        ]);
        assert_eq!(code(&o), 1, "{mode}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
    }
}

#[test]
fn usage_errors_exit_two() {
    let d = Dir::new();
    write_image(&d.p("in.npy"), &MatrixImage::filled(3, 3, Mat4::IDENTITY).unwrap());
    let input = d.s("in.npy");
    let cases: Vec<Vec<&str>> = vec![
        vec!["augment", "--input", &input, "--output", "x.npy", "--angle", "10", "--random"],
        vec!["augment", "--input", &input, "--output", "x.npy", "--padding", "wrap"],
        vec!["augment", "--input", &input, "--output", "x.npy", "--mode", "calibration"],
        vec!["augment", "--output", "x.npy"],
        vec!["augment", "--input", &input, "--output", "x.npy", "--random", "--prob-rot", "1.5"],
        vec!["synth", "--pattern", "radial", "--size", "12", "--output", "x.npy"],
        vec!["nonsense"],
    ];
    for args in cases {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn malformed_files_exit_two() {
    let d = Dir::new();
    fs::write(d.p("junk.npy"), b"definitely not an array").unwrap();
    let mut mmpi = io::encode_mmpi(&MmpiContainer::from_mueller(&MatrixImage::filled(2, 2, Mat4::IDENTITY).unwrap())).unwrap();
    mmpi[4] = 9;
    fs::write(d.p("v9.mmpi"), &mmpi).unwrap();
    let mut truncated = io::encode_npy(&[2, 2, 4, 4], &[0.0; 64]).unwrap();
    truncated.truncate(truncated.len() - 8);
    fs::write(d.p("short.npy"), &truncated).unwrap();
    for f in ["junk.npy", "v9.mmpi", "short.npy", "missing.npy"] {
        let o = run(&["decompose", "--input", &d.s(f), "--output-dir", &d.s("out")]);
        assert_eq!(code(&o), 2, "{f}");
        let o = run(&["augment", "--input", &d.s(f), "--output", &d.s("o.npy")]);
        assert_eq!(code(&o), 2, "{f}");
    }
    let short = run(&["decompose", "--input", &d.s("short.npy"), "--output-dir", &d.s("out")]);
    let msg = String::from_utf8_lossy(&short.stderr);
    assert!(msg.contains("504") && msg.contains("512"), "{msg}");
}

#[test]
fn mmpi_round_trip_through_cli() {
    let d = Dir::new();
    let scene = random_physical_scene(5, 6, 8).unwrap();
    io::write_mmpi(d.p("in.mmpi"), &MmpiContainer::from_mueller(&scene)).unwrap();
    let o = run(&["augment", "--input", &d.s("in.mmpi"), "--angle", "0", "--output", &d.s("out.mmpi")]);
    assert_ok(&o);
    assert_eq!(fs::read(d.p("in.mmpi")).unwrap(), fs::read(d.p("out.mmpi")).unwrap());
    let o = run(&["decompose", "--input", &d.s("in.mmpi"), "--output-dir", &d.s("dec"), "--mmpi"]);
    assert_ok(&o);
    let az = io::read_mmpi(d.p("dec/azimuth.mmpi")).unwrap().into_scalar_map().unwrap();
    assert_eq!(az.dims(), (5, 6));
}

#[test]
fn decompose_identity_image() {
    let d = Dir::new();
    write_image(&d.p("id.npy"), &MatrixImage::filled(4, 5, Mat4::IDENTITY).unwrap());
    let o = run(&["decompose", "--input", &d.s("id.npy"), "--output-dir", &d.s("o"), "--factors"]);
    assert_ok(&o);
    let out = stdout(&o);
    assert_eq!(value(&out, "indeterminate"), "20");
    assert_eq!(value(&out, "failed"), "0");
    assert!(read_map(&d.p("o/azimuth.npy")).values().iter().all(|v| v.is_nan()));
    assert!(read_map(&d.p("o/retardance.npy")).values().iter().all(|&v| v == 0.0));
    assert_eq!(read_image(&d.p("o/retarder.npy")).get(0, 0), &Mat4::IDENTITY);
}

#[test]
fn decompose_constant_pattern() {
    let d = Dir::new();
    let o = run(&["synth", "--pattern", "constant", "--azimuth", "35", "--delta", "70", "--size", "8x9", "--output", &d.s("c.npy")]);
    assert_ok(&o);
    let o = run(&["decompose", "--input", &d.s("c.npy"), "--output-dir", &d.s("o"), "--png", &d.s("az.png")]);
    assert_ok(&o);
    for v in read_map(&d.p("o/azimuth.npy")).values() {
        assert!((v - 35f64.to_radians()).abs() < 1e-10);
    }
    for v in read_map(&d.p("o/retardance.npy")).values() {
        assert!((v - 70f64.to_radians()).abs() < 1e-10);
    }
    assert!(fs::read(d.p("az.png")).unwrap().starts_with(b"\x89PNG"));
}

#[test]
fn decompose_mostly_failing_exits_one() {
    let d = Dir::new();
    let mut px = vec![Mat4::ZERO; 6];
    px[0] = Mat4::IDENTITY;
    write_image(&d.p("z.npy"), &MatrixImage::new(2, 3, px).unwrap());
    let o = run(&["decompose", "--input", &d.s("z.npy"), "--output-dir", &d.s("o")]);
    assert_eq!(code(&o), 1);
    assert_eq!(value(&stdout(&o), "failed"), "5");
}

#[test]
fn radial_rotation_shifts_azimuth() {
    let d = Dir::new();
    let o = run(&["synth", "--pattern", "radial", "--size", "48x48", "--delta", "90", "--output", &d.s("r.npy")]);
    assert_ok(&o);
    let o = run(&["augment", "--input", &d.s("r.npy"), "--angle", "30", "--output", &d.s("a.npy")]);
    assert_ok(&o);
    let o = run(&["decompose", "--input", &d.s("a.npy"), "--output-dir", &d.s("o")]);
    assert_ok(&o);
    // A rotated radial field is again radial: the scene is rotation invariant.
    let gt = radial_azimuth_map(48, 48).unwrap();
    write_map(&d.p("gt.npy"), &gt);
    let o = run(&[
        "compare",
        "--pred",
        &d.s("o/azimuth.npy"),
        "--truth",
        &d.s("gt.npy"),
        "--retardance",
        &d.s("o/retardance.npy"),
    ]);
    assert_ok(&o);
    let wrapped: f64 = value(&stdout(&o), "wrapped_mae_deg").parse().unwrap();
    assert!(wrapped < 0.1, "{wrapped}");

}

#[test]
fn synth_random_physical_is_admissible() {
    let d = Dir::new();
    let o = run(&["synth", "--pattern", "random-physical", "--size", "10x11", "--seed", "4", "--output", &d.s("p.npy")]);
    assert_ok(&o);
    let img = read_image(&d.p("p.npy"));
    assert!(img.pixels().iter().all(|m| is_admissible(m, ADMISSIBILITY_TOL)));
}

#[test]
fn validate_reports() {
    let d = Dir::new();
    let scene = random_physical_scene(20, 20, 2).unwrap();
    write_image(&d.p("a.npy"), &scene);
    let o = run(&["validate", "--before", &d.s("a.npy"), "--after", &d.s("a.npy"), "--json", &d.s("r.json")]);
    assert_ok(&o);
    let out = stdout(&o);
    assert_eq!(value(&out, "accuracy"), "1.0");
    assert_eq!(value(&out, "n_sampled"), "100");
    let json = fs::read_to_string(d.p("r.json")).unwrap();
    for key in ["n_sampled", "n_excluded_out_of_fov", "n_valid_pairs", "n_admissible_both", "n_became_inadmissible", "accuracy"] {
        assert!(json.contains(&format!("\"{key}\":")), "{key} missing in {json}");
    }

    let o = run(&["augment", "--input", &d.s("a.npy"), "--angle", "25", "--output", &d.s("b.npy")]);
    assert_ok(&o);
    let o = run(&["validate", "--before", &d.s("a.npy"), "--after", &d.s("b.npy"), "--angle", "25", "--samples", "300"]);
    assert_ok(&o);
    let acc: f64 = value(&stdout(&o), "accuracy").parse().unwrap();
    assert!(acc >= 0.99, "{acc}");

    write_image(&d.p("small.npy"), &random_physical_scene(5, 5, 2).unwrap());
    let o = run(&["validate", "--before", &d.s("a.npy"), "--after", &d.s("small.npy")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_cases() {
    let d = Dir::new();
    let ten = ScalarMap::filled(4, 4, 10f64.to_radians()).unwrap();
    let one_seventy = ScalarMap::filled(4, 4, 170f64.to_radians()).unwrap();
    write_map(&d.p("ten.npy"), &ten);
    write_map(&d.p("170.npy"), &one_seventy);
    let o = run(&["compare", "--pred", &d.s("ten.npy"), "--truth", &d.s("ten.npy")]);
    assert_ok(&o);
    assert_eq!(value(&stdout(&o), "cyclic_mae_deg"), "0.000");
    let o = run(&["compare", "--pred", &d.s("ten.npy"), "--truth", &d.s("170.npy")]);
    assert_ok(&o);
    assert_eq!(value(&stdout(&o), "cyclic_mae_deg"), "0.000");
    assert_eq!(value(&stdout(&o), "wrapped_mae_deg"), "20.000");

    // At the 100th percentile only the highest-retardance pixels remain; they
    // carry no azimuth here, so the mask is empty.
    let mut delta = vec![0.5; 16];
    delta[3] = 1.0;
    let mut pred = vec![0.2; 16];
    pred[3] = f64::NAN;
    write_map(&d.p("delta.npy"), &ScalarMap::new(4, 4, delta).unwrap());
    write_map(&d.p("pred.npy"), &ScalarMap::new(4, 4, pred).unwrap());
    let o = run(&[
        "compare",
        "--pred",
        &d.s("pred.npy"),
        "--truth",
        &d.s("ten.npy"),
        "--retardance",
        &d.s("delta.npy"),
        "--percentile",
        "100",
    ]);
    assert_eq!(code(&o), 1);

    write_map(&d.p("wide.npy"), &ScalarMap::filled(4, 5, 0.0).unwrap());
    let o = run(&["compare", "--pred", &d.s("wide.npy"), "--truth", &d.s("ten.npy")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_supplies_flags() {
    let d = Dir::new();
    write_image(&d.p("in.npy"), &MatrixImage::filled(6, 6, make_linear_retarder(0.3, 1.0)).unwrap());
    fs::write(d.p("c.ini"), "# defaults\n[augment]\nangle = 90\nflip_h = true\n").unwrap();
    let o = run(&["augment", "--config", &d.s("c.ini"), "--input", &d.s("in.npy"), "--output", &d.s("o.npy")]);
    assert_ok(&o);
    let out = stdout(&o);
    assert_eq!(value(&out, "rotation_deg"), "90");
    assert_eq!(value(&out, "flip_h"), "true");
    let o = run(&["augment", "--config", &d.s("c.ini"), "--input", &d.s("in.npy"), "--angle", "10", "--output", &d.s("o.npy")]);
    assert_ok(&o);
    assert_eq!(value(&stdout(&o), "rotation_deg"), "10");
    let o = run(&["augment", "--config", &d.s("missing.ini"), "--input", &d.s("in.npy"), "--output", &d.s("o.npy")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn thread_cap_and_bench() {
    let d = Dir::new();
    write_image(&d.p("in.npy"), &random_physical_scene(16, 16, 0).unwrap());
    let args = ["augment", "--input", &d.s("in.npy"), "--angle", "12", "--output", &d.s("o.npy"), "--bench", "--repeat", "3"];
    let o = bin().env("POLARAUG_THREADS", "1").args(args).output().unwrap();
    assert_ok(&o);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("3 runs on 1 threads") && err.contains("ms/frame"), "{err}");
    let o = bin().env("POLARAUG_THREADS", "zero").args(args).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn global_config_keys_skip_subcommands_without_them() {
    let d = Dir::new();
    write_map(&d.p("a.npy"), &ScalarMap::filled(3, 3, 0.4).unwrap());
    fs::write(d.p("c.ini"), "seed = 3\npercentile = 0\n").unwrap();
    let o = run(&["compare", "--config", &d.s("c.ini"), "--pred", &d.s("a.npy"), "--truth", &d.s("a.npy")]);
    assert_ok(&o);
    assert_eq!(value(&stdout(&o), "used"), "9");
    fs::write(d.p("bad.ini"), "[compare]\nseed = 3\n").unwrap();
    let o = run(&["compare", "--config", &d.s("bad.ini"), "--pred", &d.s("a.npy"), "--truth", &d.s("a.npy")]);
    assert_eq!(code(&o), 2);
}
