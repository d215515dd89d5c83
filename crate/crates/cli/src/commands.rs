use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use polaraug::decompose::{decompose_image, PolarDecomposition};
use polaraug::io::render_azimuth_png;
use polaraug::metrics::{admissibility_report, admissibility_report_for_spec, cyclic_mae, retardance_mask, wrapped_mae};
use polaraug::synth::{constant_scene, forward_intensities, radial_scene, random_calibration, random_physical_scene};
use polaraug::transforms::{
    augment_mueller, augment_raw, compute_mueller, sample_spec, tetrahedral_analyzer, AugmentPolicy, AugmentSpec,
    CalibrationPair,
};
use polaraug::{Error, Mask, Mat4, MatrixImage};

use crate::error::{CliError, CliResult};
use crate::files::{self, Input};
use crate::{
    AugmentArgs, CalibrationKind, CompareArgs, ComputeArgs, DecomposeArgs, Mode, Pattern, RawInputArgs, SynthArgs,
    ValidateArgs,
};

type Pick = fn(&PolarDecomposition) -> Mat4;

/// Writes a report to stdout. A closed pipe is not an error.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush());
}

fn read_source(s: &RawInputArgs) -> CliResult<Input> {
    files::read_input(s.input.as_deref(), s.analyzer.as_deref(), s.intensities.as_deref(), s.modulator.as_deref())
}

fn read_mueller(s: &RawInputArgs) -> CliResult<MatrixImage> {
    match read_source(s)? {
        Input::Mueller(m) => Ok(m),
        Input::Raw { intensities, calibration } => Ok(compute_mueller(&intensities, &calibration)?),
    }
}

fn report_file(out: &mut String, path: &Path, digest: &str) {
    let _ = writeln!(out, "output={}", path.display());
    let _ = writeln!(out, "sha256={digest}");
}

fn build_spec(a: &AugmentArgs) -> CliResult<AugmentSpec> {
    let spec = if a.random {
        let policy = AugmentPolicy {
            p_rotation: a.prob_rot,
            p_flip_h: a.prob_flip,
            p_flip_v: a.prob_flip,
            angle_range: (-a.max_angle.to_radians(), a.max_angle.to_radians()),
            padding: a.padding.into(),
            interpolation: a.interp.into(),
        };
        policy.validate()?;
        sample_spec(&policy, a.seed)
    } else {
        AugmentSpec {
            rotation: a.angle.unwrap_or(0.0).to_radians(),
            flip_h: a.flip_h,
            flip_v: a.flip_v,
            padding: a.padding.into(),
            interpolation: a.interp.into(),
            seed: a.seed,
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn bench<T>(label: &str, dims: (usize, usize), repeat: usize, mut f: impl FnMut() -> CliResult<T>) -> CliResult<T> {
    let mut times = Vec::with_capacity(repeat.max(1));
    let mut last = None;
    for _ in 0..repeat.max(1) {
        let t = Instant::now();
        last = Some(f()?);
        times.push(t.elapsed().as_secs_f64() * 1e3);
    }
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let sd = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n).sqrt();
    eprintln!(
        "bench: {label} {}x{} frame, {} runs on {} threads: {mean:.2} ± {sd:.2} ms/frame",
        dims.0,
        dims.1,
        times.len(),
        rayon::current_num_threads()
    );
    Ok(last.expect("at least one run"))
}

pub fn augment(a: &AugmentArgs) -> CliResult {
    if (a.flip_h || a.flip_v) && a.random {
        return Err(CliError::usage("--flip-h/--flip-v cannot be combined with --random"));
    }
    let spec = build_spec(a)?;
    let input = read_source(&a.source)?;
    let repeat = if a.bench { a.repeat } else { 1 };
    let mut out = String::new();
    let _ = writeln!(out, "rotation_deg={}", (spec.rotation.to_degrees() * 1e10).round() / 1e10);
    let _ = writeln!(out, "flip_h={}", spec.flip_h);
    let _ = writeln!(out, "flip_v={}", spec.flip_v);
    let _ = writeln!(out, "seed={}", spec.seed);
    match (a.mode, input) {
        (Mode::Mueller, input) => {
            let img = match input {
                Input::Mueller(m) => m,
                Input::Raw { intensities, calibration } => compute_mueller(&intensities, &calibration)?,
            };
            let dims = img.dims();
            let run = || Ok(augment_mueller(&img, &spec)?);
            let result = if a.bench { bench("mueller", dims, repeat, run)? } else { run()? };
            let digest = files::write_matrix_image(&a.output, &result)?;
            report_file(&mut out, &a.output, &digest);
        }
        (Mode::Calibration, Input::Raw { intensities, calibration }) => {
            let dims = intensities.dims();
            // Checked up front so a singular calibration is a domain error.
            compute_mueller(&intensities, &calibration)?;
            let run = || Ok(augment_raw(&intensities, &calibration, &spec)?);
            let (b, cal) = if a.bench { bench("calibration", dims, repeat, run)? } else { run()? };
            for (path, digest) in files::write_raw(&a.output, &b, &cal)? {
                report_file(&mut out, &path, &digest);
            }
        }
        (Mode::Calibration, Input::Mueller(_)) => {
            return Err(CliError::usage("--mode calibration needs raw intensities and a calibration"));
        }
    }
    emit(&out);
    Ok(())
}

pub fn decompose(a: &DecomposeArgs) -> CliResult {
    let img = read_mueller(&a.source)?;
    let maps = decompose_image(&img, a.factors);
    std::fs::create_dir_all(&a.output_dir)
        .map_err(|e| CliError::usage(format!("{}: {e}", a.output_dir.display())))?;
    let ext = if a.mmpi { "mmpi" } else { "npy" };
    let mut out = String::new();
    let _ = writeln!(out, "pixels={}", img.len());
    let _ = writeln!(out, "failed={}", maps.failed);
    let _ = writeln!(out, "indeterminate={}", maps.indeterminate);

    let az_path = a.output_dir.join(format!("azimuth.{ext}"));
    report_file(&mut out, &az_path, &files::write_scalar_map(&az_path, &maps.azimuth)?);
    let ret_path = a.output_dir.join(format!("retardance.{ext}"));
    report_file(&mut out, &ret_path, &files::write_scalar_map(&ret_path, &maps.retardance)?);

    if let Some(factors) = &maps.factors {
        let nan = Mat4([[f64::NAN; 4]; 4]);
        let (h, w) = img.dims();
        let stack = |pick: Pick| {
            MatrixImage::new(h, w, factors.iter().map(|f| f.as_ref().map_or(nan, pick)).collect())
        };
        let picks: [(&str, Pick); 3] = [
            ("depolarizer", |f| f.depolarizer),
            ("retarder", |f| f.retarder),
            ("diattenuator", |f| f.diattenuator),
        ];
        for (name, pick) in picks {
            let path = a.output_dir.join(format!("{name}.{ext}"));
            report_file(&mut out, &path, &files::write_matrix_image(&path, &stack(pick)?)?);
        }
    }

    let mask = retardance_mask(&maps.retardance, a.mask_percentile)?;
    let _ = writeln!(out, "mask_percentile={}", a.mask_percentile);
    let _ = writeln!(out, "mask_pixels={}", mask.count());
    if let Some(png) = &a.png {
        render_azimuth_png(&maps.azimuth, Some(&mask), png)?;
        let _ = writeln!(out, "png={}", png.display());
    }
    emit(&out);
    if 2 * maps.failed > img.len() {
        return Err(CliError::domain(format!("decomposition failed on {} of {} pixels", maps.failed, img.len())));
    }
    Ok(())
}

pub fn validate(a: &ValidateArgs) -> CliResult {
    let load = |p: &Path| {
        read_mueller(&RawInputArgs { input: Some(p.to_path_buf()), analyzer: None, intensities: None, modulator: None })
    };
    let (before, after) = (load(&a.before)?, load(&a.after)?);
    let report = if a.angle.is_some() || a.flip_h || a.flip_v {
        let spec = AugmentSpec::rotation(a.angle.unwrap_or(0.0).to_radians()).with_flips(a.flip_h, a.flip_v);
        spec.validate()?;
        admissibility_report_for_spec(&before, &after, &spec, a.samples, a.seed, a.tol)?
    } else {
        admissibility_report(&before, &after, a.samples, a.seed, a.tol)?
    };
    let json = report.to_json();
    if let Some(path) = &a.json {
        std::fs::write(path, format!("{json}\n")).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    emit(&format!("{}{json}\n", report.to_key_value()));
    Ok(())
}

pub fn compare(a: &CompareArgs) -> CliResult {
    let pred = files::read_scalar_map(&a.pred)?;
    let truth = files::read_scalar_map(&a.truth)?;
    if pred.dims() != truth.dims() {
        return Err(Error::DimensionMismatch { expected: truth.dims(), found: pred.dims() }.into());
    }
    let mask = match &a.retardance {
        Some(p) => {
            let delta = files::read_scalar_map(p)?;
            if delta.dims() != truth.dims() {
                return Err(Error::DimensionMismatch { expected: truth.dims(), found: delta.dims() }.into());
            }
            retardance_mask(&delta, a.percentile)?
        }
        None => Mask::all(truth.height(), truth.width()),
    };
    let eq = cyclic_mae(&pred, &truth, &mask)?;
    let wrapped = wrapped_mae(&pred, &truth, &mask)?;
    emit(&format!(
        "cyclic_mae_deg={:.3}\nwrapped_mae_deg={:.3}\nused={}\nnan_excluded={}\n",
        eq.mean_degrees(),
        wrapped.mean_degrees(),
        eq.used,
        eq.nan_excluded
    ));
    Ok(())
}

fn parse_size(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::usage(format!("--size must look like HxW, got {s:?}"));
    let (h, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    if h == 0 || w == 0 {
        return Err(bad());
    }
    Ok((h, w))
}

pub fn synth(a: &SynthArgs) -> CliResult {
    let (h, w) = parse_size(&a.size)?;
    if !a.delta.is_finite() || !a.azimuth.is_finite() {
        return Err(CliError::usage("--delta and --azimuth must be finite"));
    }
    let scene = match a.pattern {
        Pattern::Constant => constant_scene(h, w, a.azimuth.to_radians(), a.delta.to_radians())?,
        Pattern::Radial => radial_scene(h, w, a.delta.to_radians())?,
        Pattern::RandomPhysical => random_physical_scene(h, w, a.seed)?,
    };
    let mut out = String::new();
    let calibration = match a.calibration {
        CalibrationKind::None => None,
        CalibrationKind::Global => {
            let analyzer = tetrahedral_analyzer();
            Some(CalibrationPair::global(analyzer, analyzer.transpose()))
        }
        CalibrationKind::PerPixel => Some(random_calibration(h, w, a.seed.wrapping_add(1))?),
    };
    match calibration {
        None => report_file(&mut out, &a.output, &files::write_matrix_image(&a.output, &scene)?),
        Some(cal) => {
            let b = forward_intensities(&scene, &cal)?;
            for (path, digest) in files::write_raw(&a.output, &b, &cal)? {
                report_file(&mut out, &path, &digest);
            }
        }
    }
    emit(&out);
    Ok(())
}

pub fn compute(a: &ComputeArgs) -> CliResult {
    match read_source(&a.source)? {
        Input::Raw { intensities, calibration } => {
            let m = compute_mueller(&intensities, &calibration)?;
            let mut out = String::new();
            report_file(&mut out, &a.output, &files::write_matrix_image(&a.output, &m)?);
            emit(&out);
            Ok(())
        }
        Input::Mueller(_) => Err(CliError::usage("compute needs raw intensities and a calibration")),
    }
}
