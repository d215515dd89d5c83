//! Python bindings.
//!
//! Arrays may be `float64` or `float32` with the shapes the NPY reader
//! accepts. Input is copied once into `f64`; results come back in the input
//! dtype (`float32` results are rounded to nearest). Augmentation specs are
//! plain dicts with the keys `rotation` (radians), `flip_h`, `flip_v`,
//! `padding` (`"identity"` or `"mirror"`), `interpolation` (`"nearest"` or
//! `"bilinear"`) and `seed`; missing keys take the identity defaults.

use numpy::{PyArray1, PyArrayMethods, PyReadonlyArrayDyn, PyUntypedArrayMethods};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use polaraug::decompose::{self as core_decompose, decompose_image};
use polaraug::transforms::{self, AugmentPolicy, AugmentSpec, CalibrationPair, Interpolation, Padding};
use polaraug::{Error, Mat4, MatrixImage};

create_exception!(polaraug_py, PolaraugError, PyException);
create_exception!(polaraug_py, SingularCalibrationError, PolaraugError);
create_exception!(polaraug_py, ShapeError, PolaraugError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SingularCalibration { .. } => SingularCalibrationError::new_err(e.to_string()),
        Error::InvalidDimensions { .. } | Error::DimensionMismatch { .. } => ShapeError::new_err(e.to_string()),
        _ => PolaraugError::new_err(e.to_string()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dtype {
    F32,
    F64,
}

struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
    dtype: Dtype,
}

fn read_array(obj: &Bound<'_, PyAny>) -> PyResult<Array> {
    if let Ok(a) = obj.extract::<PyReadonlyArrayDyn<'_, f64>>() {
        let data = a.as_array().iter().copied().collect();
        return Ok(Array { shape: a.shape().to_vec(), data, dtype: Dtype::F64 });
    }
    if let Ok(a) = obj.extract::<PyReadonlyArrayDyn<'_, f32>>() {
        let data = a.as_array().iter().map(|&v| f64::from(v)).collect();
        return Ok(Array { shape: a.shape().to_vec(), data, dtype: Dtype::F32 });
    }
    Err(ShapeError::new_err("expected a float32 or float64 numpy array"))
}

impl Array {
    fn image(&self) -> PyResult<MatrixImage> {
        match self.shape[..] {
            [h, w, 4, 4] | [h, w, 16] => MatrixImage::from_flat(h, w, &self.data).map_err(to_py),
            _ => Err(ShapeError::new_err(format!("expected shape (H, W, 4, 4) or (H, W, 16), got {:?}", self.shape))),
        }
    }

    /// A `(4, 4)` array is a global matrix, anything else a per-pixel image.
    fn field(&self) -> PyResult<Result<Mat4, MatrixImage>> {
        if self.shape == [4, 4] {
            Ok(Ok(Mat4::from_row_major(&self.data)))
        } else {
            self.image().map(Err)
        }
    }
}

fn emit<'py>(py: Python<'py>, shape: &[usize], data: Vec<f64>, dtype: Dtype) -> PyResult<Bound<'py, PyAny>> {
    match dtype {
        Dtype::F64 => Ok(PyArray1::from_vec(py, data).reshape(shape.to_vec())?.into_any()),
        Dtype::F32 => {
            let narrowed: Vec<f32> = data.iter().map(|&v| v as f32).collect();
            Ok(PyArray1::from_vec(py, narrowed).reshape(shape.to_vec())?.into_any())
        }
    }
}

fn emit_image<'py>(py: Python<'py>, img: &MatrixImage, dtype: Dtype) -> PyResult<Bound<'py, PyAny>> {
    emit(py, &[img.height(), img.width(), 4, 4], img.to_flat(), dtype)
}

fn emit_field<'py>(py: Python<'py>, f: Result<&Mat4, &MatrixImage>, dtype: Dtype) -> PyResult<Bound<'py, PyAny>> {
    match f {
        Ok(m) => emit(py, &[4, 4], m.to_row_major().to_vec(), dtype),
        Err(img) => emit_image(py, img, dtype),
    }
}

fn calibration(analyzer: &Array, modulator: &Array, dims: Option<(usize, usize)>) -> PyResult<CalibrationPair> {
    match (analyzer.field()?, modulator.field()?) {
        (Ok(a), Ok(w)) => Ok(CalibrationPair::global(a, w)),
        (a, w) => {
            let dims = match (&a, &w, dims) {
                (_, _, Some(d)) => d,
                (Err(img), _, None) | (_, Err(img), None) => img.dims(),
                _ => unreachable!("both global handled above"),
            };
            let broadcast = |f: Result<Mat4, MatrixImage>| match f {
                Ok(m) => MatrixImage::filled(dims.0, dims.1, m),
                Err(img) => Ok(img),
            };
            CalibrationPair::per_pixel(broadcast(a).map_err(to_py)?, broadcast(w).map_err(to_py)?).map_err(to_py)
        }
    }
}

fn parse_padding(s: &str) -> PyResult<Padding> {
    match s {
        "identity" | "identity_fill" => Ok(Padding::IdentityFill),
        "mirror" => Ok(Padding::Mirror),
        _ => Err(PyValueError::new_err(format!("unknown padding {s:?}"))),
    }
}

fn parse_interpolation(s: &str) -> PyResult<Interpolation> {
    match s {
        "nearest" => Ok(Interpolation::Nearest),
        "bilinear" => Ok(Interpolation::Bilinear),
        _ => Err(PyValueError::new_err(format!("unknown interpolation {s:?}"))),
    }
}

fn parse_spec(d: Option<&Bound<'_, PyDict>>) -> PyResult<AugmentSpec> {
    let mut spec = AugmentSpec::identity();
    if let Some(d) = d {
        for (k, v) in d.iter() {
            let key: String = k.extract()?;
            match key.as_str() {
                "rotation" => spec.rotation = v.extract()?,
                "flip_h" => spec.flip_h = v.extract()?,
                "flip_v" => spec.flip_v = v.extract()?,
                "padding" => spec.padding = parse_padding(&v.extract::<String>()?)?,
                "interpolation" => spec.interpolation = parse_interpolation(&v.extract::<String>()?)?,
                "seed" => spec.seed = v.extract()?,
                _ => return Err(PyKeyError::new_err(format!("unknown spec key {key:?}"))),
            }
        }
    }
    spec.validate().map_err(to_py)?;
    Ok(spec)
}

fn spec_dict<'py>(py: Python<'py>, spec: &AugmentSpec) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("rotation", spec.rotation)?;
    d.set_item("flip_h", spec.flip_h)?;
    d.set_item("flip_v", spec.flip_v)?;
    d.set_item("padding", if spec.padding == Padding::Mirror { "mirror" } else { "identity" })?;
    d.set_item("interpolation", if spec.interpolation == Interpolation::Nearest { "nearest" } else { "bilinear" })?;
    d.set_item("seed", spec.seed)?;
    Ok(d)
}

/// Rotates and/or flips a Mueller image consistently in space and polarization.
#[pyfunction]
#[pyo3(signature = (mueller, spec=None))]
fn augment<'py>(
    py: Python<'py>,
    mueller: &Bound<'py, PyAny>,
    spec: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let arr = read_array(mueller)?;
    let img = arr.image()?;
    let spec = parse_spec(spec)?;
    let out = py.detach(|| transforms::augment_mueller(&img, &spec)).map_err(to_py)?;
    emit_image(py, &out, arr.dtype)
}

/// Calibration-path augmentation. Returns `(intensities, analyzer, modulator)`.
#[pyfunction]
#[pyo3(signature = (intensities, analyzer, modulator, spec=None))]
fn augment_calibration<'py>(
    py: Python<'py>,
    intensities: &Bound<'py, PyAny>,
    analyzer: &Bound<'py, PyAny>,
    modulator: &Bound<'py, PyAny>,
    spec: Option<&Bound<'py, PyDict>>,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let b_arr = read_array(intensities)?;
    let b = b_arr.image()?;
    let cal = calibration(&read_array(analyzer)?, &read_array(modulator)?, Some(b.dims()))?;
    let spec = parse_spec(spec)?;
    let (b2, cal2) = py.detach(|| transforms::augment_raw(&b, &cal, &spec)).map_err(to_py)?;
    let dt = b_arr.dtype;
    let (a, w) = match &cal2 {
        CalibrationPair::Global { analyzer, modulator } => (emit_field(py, Ok(analyzer), dt)?, emit_field(py, Ok(modulator), dt)?),
        CalibrationPair::PerPixel { analyzer, modulator } => {
            (emit_field(py, Err(analyzer), dt)?, emit_field(py, Err(modulator), dt)?)
        }
    };
    Ok((emit_image(py, &b2, dt)?, a, w))
}

/// `M = A⁻¹ B W⁻¹` per pixel.
#[pyfunction]
fn compute_mueller<'py>(
    py: Python<'py>,
    intensities: &Bound<'py, PyAny>,
    analyzer: &Bound<'py, PyAny>,
    modulator: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let b_arr = read_array(intensities)?;
    let b = b_arr.image()?;
    let cal = calibration(&read_array(analyzer)?, &read_array(modulator)?, Some(b.dims()))?;
    let m = py.detach(|| transforms::compute_mueller(&b, &cal)).map_err(to_py)?;
    emit_image(py, &m, b_arr.dtype)
}

/// Folds the polarimetric part of `spec` into a calibration. Returns
/// `(analyzer, modulator)` with the input shapes.
#[pyfunction]
#[pyo3(signature = (analyzer, modulator, spec=None))]
fn embed_calibration<'py>(
    py: Python<'py>,
    analyzer: &Bound<'py, PyAny>,
    modulator: &Bound<'py, PyAny>,
    spec: Option<&Bound<'py, PyDict>>,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let (a_arr, w_arr) = (read_array(analyzer)?, read_array(modulator)?);
    let cal = calibration(&a_arr, &w_arr, None)?;
    let spec = parse_spec(spec)?;
    let out = transforms::embed_calibration(&cal, &spec.polar_matrix()).map_err(to_py)?;
    match &out {
        CalibrationPair::Global { analyzer, modulator } => {
            Ok((emit_field(py, Ok(analyzer), a_arr.dtype)?, emit_field(py, Ok(modulator), w_arr.dtype)?))
        }
        CalibrationPair::PerPixel { analyzer, modulator } => {
            Ok((emit_field(py, Err(analyzer), a_arr.dtype)?, emit_field(py, Err(modulator), w_arr.dtype)?))
        }
    }
}

/// Azimuth and linear retardance maps (radians). Pixels without an azimuth,
/// or whose decomposition fails, are NaN.
#[pyfunction]
fn decompose<'py>(py: Python<'py>, mueller: &Bound<'py, PyAny>) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let arr = read_array(mueller)?;
    let img = arr.image()?;
    let maps = py.detach(|| decompose_image(&img, false));
    let shape = [img.height(), img.width()];
    Ok((
        emit(py, &shape, maps.azimuth.values().to_vec(), arr.dtype)?,
        emit(py, &shape, maps.retardance.values().to_vec(), arr.dtype)?,
    ))
}

/// Draws a spec dict from the augmentation policy.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (seed, p_rotation=0.5, p_flip_h=0.25, p_flip_v=0.25, angle_range=None, padding="identity", interpolation="bilinear"))]
fn sample_spec<'py>(
    py: Python<'py>,
    seed: u64,
    p_rotation: f64,
    p_flip_h: f64,
    p_flip_v: f64,
    angle_range: Option<(f64, f64)>,
    padding: &str,
    interpolation: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let policy = AugmentPolicy {
        p_rotation,
        p_flip_h,
        p_flip_v,
        angle_range: angle_range.unwrap_or(AugmentPolicy::default().angle_range),
        padding: parse_padding(padding)?,
        interpolation: parse_interpolation(interpolation)?,
    };
    policy.validate().map_err(to_py)?;
    spec_dict(py, &transforms::sample_spec(&policy, seed))
}

/// The 4×4 polarimetric transform of a spec.
#[pyfunction]
#[pyo3(signature = (spec=None))]
fn polar_matrix<'py>(py: Python<'py>, spec: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let spec = parse_spec(spec)?;
    emit(py, &[4, 4], spec.polar_matrix().to_row_major().to_vec(), Dtype::F64)
}

#[pyfunction]
#[pyo3(signature = (mueller, tol=core_decompose::ADMISSIBILITY_TOL))]
fn is_admissible(mueller: &Bound<'_, PyAny>, tol: f64) -> PyResult<bool> {
    let arr = read_array(mueller)?;
    if arr.shape != [4, 4] {
        return Err(ShapeError::new_err(format!("expected shape (4, 4), got {:?}", arr.shape)));
    }
    Ok(core_decompose::is_admissible(&Mat4::from_row_major(&arr.data), tol))
}

#[pymodule]
fn polaraug_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("PolaraugError", py.get_type::<PolaraugError>())?;
    m.add("SingularCalibrationError", py.get_type::<SingularCalibrationError>())?;
    m.add("ShapeError", py.get_type::<ShapeError>())?;
    m.add("RNG_ALGORITHM", transforms::RNG_ALGORITHM)?;
    m.add_function(wrap_pyfunction!(augment, m)?)?;
    m.add_function(wrap_pyfunction!(augment_calibration, m)?)?;
    m.add_function(wrap_pyfunction!(compute_mueller, m)?)?;
    m.add_function(wrap_pyfunction!(embed_calibration, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(sample_spec, m)?)?;
    m.add_function(wrap_pyfunction!(polar_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(is_admissible, m)?)?;
    Ok(())
}
