//! Reading inputs by content (NPY or MMPI magic) and writing outputs by
//! extension (`.mmpi`, otherwise NPY). Every write returns the SHA-256 of
//! the bytes written.

use std::fs;
use std::path::{Path, PathBuf};

use polaraug::io::{self, FormatError, MmpiContainer, NpyArray};
use polaraug::transforms::CalibrationPair;
use polaraug::{Mat4, MatrixImage, ScalarMap};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub enum Array {
    Npy(NpyArray),
    Mmpi(MmpiContainer),
}

pub fn read_array(path: &Path) -> CliResult<Array> {
    let bytes = fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let ctx = |e: FormatError| CliError::usage(format!("{}: {e}", path.display()));
    if bytes.starts_with(io::MMPI_MAGIC) {
        io::parse_mmpi(&bytes).map(Array::Mmpi).map_err(ctx)
    } else {
        io::parse_npy(&bytes).map(Array::Npy).map_err(ctx)
    }
}

/// A `(4, 4)` matrix applies to every pixel; anything else must be a
/// matrix image.
pub enum Field {
    Global(Mat4),
    PerPixel(MatrixImage),
}

pub fn read_field(path: &Path) -> CliResult<Field> {
    let ctx = |e: FormatError| CliError::usage(format!("{}: {e}", path.display()));
    match read_array(path)? {
        Array::Npy(a) if matches!(a.kind(), Ok(io::ArrayKind::Matrix)) => Ok(Field::Global(a.into_matrix().map_err(ctx)?)),
        Array::Npy(a) => Ok(Field::PerPixel(a.into_matrix_image().map_err(ctx)?)),
        Array::Mmpi(c) => Ok(Field::PerPixel(c.into_mueller().map_err(ctx)?)),
    }
}

pub fn read_matrix_image(path: &Path) -> CliResult<MatrixImage> {
    match read_field(path)? {
        Field::PerPixel(img) => Ok(img),
        Field::Global(_) => Err(CliError::usage(format!("{}: expected an image, got a single 4x4 matrix", path.display()))),
    }
}

pub fn read_scalar_map(path: &Path) -> CliResult<ScalarMap> {
    let ctx = |e: FormatError| CliError::usage(format!("{}: {e}", path.display()));
    match read_array(path)? {
        Array::Npy(a) => a.into_scalar_map().map_err(ctx),
        Array::Mmpi(c) => c.into_scalar_map().map_err(ctx),
    }
}

/// Either a Mueller image or raw intensities with calibration.
#[allow(clippy::large_enum_variant)]
pub enum Input {
    Mueller(MatrixImage),
    Raw { intensities: MatrixImage, calibration: CalibrationPair },
}

pub fn calibration_from_fields(analyzer: Field, modulator: Field, dims: (usize, usize)) -> CliResult<CalibrationPair> {
    let broadcast = |f: Field| match f {
        Field::Global(m) => MatrixImage::filled(dims.0, dims.1, m),
        Field::PerPixel(img) => Ok(img),
    };
    match (analyzer, modulator) {
        (Field::Global(a), Field::Global(w)) => Ok(CalibrationPair::global(a, w)),
        (a, w) => Ok(CalibrationPair::per_pixel(broadcast(a)?, broadcast(w)?)?),
    }
}

/// `--input` holds a Mueller image or a 48-channel bundle; otherwise all
/// three of `--analyzer`, `--intensities`, `--modulator` are required.
pub fn read_input(
    input: Option<&Path>,
    analyzer: Option<&Path>,
    intensities: Option<&Path>,
    modulator: Option<&Path>,
) -> CliResult<Input> {
    match (input, analyzer, intensities, modulator) {
        (Some(p), None, None, None) => match read_array(p)? {
            Array::Mmpi(c) if c.channels == io::CHANNELS_BUNDLE => {
                let (intensities, calibration) = c.into_bundle()?;
                Ok(Input::Raw { intensities, calibration })
            }
            Array::Mmpi(c) => Ok(Input::Mueller(c.into_mueller().map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?)),
            Array::Npy(a) => Ok(Input::Mueller(a.into_matrix_image().map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?)),
        },
        (None, Some(a), Some(b), Some(w)) => {
            let intensities = read_matrix_image(b)?;
            let calibration = calibration_from_fields(read_field(a)?, read_field(w)?, intensities.dims())?;
            calibration.check_dims(intensities.dims())?;
            Ok(Input::Raw { intensities, calibration })
        }
        _ => Err(CliError::usage("give either --input, or all of --analyzer, --intensities and --modulator")),
    }
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn is_mmpi(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mmpi"))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<String> {
    fs::write(path, bytes).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(digest(bytes))
}

pub fn write_matrix_image(path: &Path, img: &MatrixImage) -> CliResult<String> {
    let bytes = if is_mmpi(path) {
        io::encode_mmpi(&MmpiContainer::from_mueller(img))?
    } else {
        io::encode_npy(&[img.height(), img.width(), 4, 4], &img.to_flat())?
    };
    write_bytes(path, &bytes)
}

pub fn write_scalar_map(path: &Path, map: &ScalarMap) -> CliResult<String> {
    let bytes = if is_mmpi(path) {
        io::encode_mmpi(&MmpiContainer::from_scalar_map(map))?
    } else {
        io::encode_npy(&[map.height(), map.width()], map.values())?
    };
    write_bytes(path, &bytes)
}

pub fn write_matrix(path: &Path, m: &Mat4) -> CliResult<String> {
    write_bytes(path, &io::encode_npy(&[4, 4], &m.to_row_major())?)
}

/// Writes raw data either as one 48-channel `.mmpi` bundle or as
/// `analyzer.npy`, `intensities.npy`, `modulator.npy` inside a directory.
/// Returns `(file, digest)` pairs.
pub fn write_raw(path: &Path, intensities: &MatrixImage, cal: &CalibrationPair) -> CliResult<Vec<(PathBuf, String)>> {
    if is_mmpi(path) {
        let bytes = io::encode_mmpi(&MmpiContainer::from_bundle(intensities, cal)?)?;
        return Ok(vec![(path.to_path_buf(), write_bytes(path, &bytes)?)]);
    }
    fs::create_dir_all(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let (a, b, w) = (path.join("analyzer.npy"), path.join("intensities.npy"), path.join("modulator.npy"));
    let mut out = Vec::with_capacity(3);
    match cal {
        CalibrationPair::Global { analyzer, modulator } => {
            out.push((a.clone(), write_matrix(&a, analyzer)?));
            out.push((b.clone(), write_matrix_image(&b, intensities)?));
            out.push((w.clone(), write_matrix(&w, modulator)?));
        }
        CalibrationPair::PerPixel { analyzer, modulator } => {
            out.push((a.clone(), write_matrix_image(&a, analyzer)?));
            out.push((b.clone(), write_matrix_image(&b, intensities)?));
            out.push((w.clone(), write_matrix_image(&w, modulator)?));
        }
    }
    Ok(out)
}
