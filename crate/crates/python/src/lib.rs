//! Python bindings. Images cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyFileNotFoundError};
use pyo3::prelude::*;
use scsa_core as core;

create_exception!(scsa, ScsaError, PyException);
create_exception!(scsa, NumericalError, ScsaError);

fn to_py(e: core::Error) -> PyErr {
    match &e {
        core::Error::NotFound { .. } => PyFileNotFoundError::new_err(e.to_string()),
        _ if e.is_numerical() => NumericalError::new_err(e.to_string()),
        _ => ScsaError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(ScsaError::new_err("rows must all have the same length"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn image(rows: &[Vec<f64>], delta: f64) -> PyResult<core::Image> {
    core::Image::with_metadata(matrix(rows)?, delta, 1.0).map_err(to_py)
}

fn lists(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Semi-classical parameter `h`, exponent `gamma`, threshold `lambda_` and
/// grid spacing `delta`.
#[pyclass(frozen, from_py_object, name = "Params")]
#[derive(Clone, Copy)]
struct Params {
    inner: core::ScsaParams,
}

#[pymethods]
impl Params {
    #[new]
    #[pyo3(signature = (h, gamma = 4.0, lambda_ = 0.0, delta = 1.0))]
    fn new(h: f64, gamma: f64, lambda_: f64, delta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: core::ScsaParams::new(h, gamma, lambda_, delta).map_err(to_py)?,
        })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!("Params(h={}, gamma={}, lambda_={}, delta={})", p.h, p.gamma, p.lambda, p.delta)
    }
}

#[pyclass(frozen, name = "Reconstruction")]
struct Reconstruction {
    report: core::ReconstructionReport,
}

#[pymethods]
impl Reconstruction {
    /// Reconstruction clamped into [0, 1].
    #[getter]
    fn pixels(&self) -> Vec<Vec<f64>> {
        lists(self.report.image().pixels())
    }

    /// Unclamped formula values.
    #[getter]
    fn raw(&self) -> Vec<Vec<f64>> {
        lists(&self.report.reconstructed)
    }

    #[getter]
    fn neg_counts_rows(&self) -> Vec<usize> {
        self.report.neg_counts_rows.clone()
    }

    #[getter]
    fn neg_counts_cols(&self) -> Vec<usize> {
        self.report.neg_counts_cols.clone()
    }

    #[getter]
    fn total_negative(&self) -> usize {
        self.report.total_negative()
    }

    #[getter]
    fn params(&self) -> Params {
        Params {
            inner: self.report.params,
        }
    }
}

#[pyclass(frozen, skip_from_py_object, name = "SweepRow")]
#[derive(Clone, Copy)]
struct SweepRow {
    #[pyo3(get)]
    h: f64,
    #[pyo3(get)]
    gamma: f64,
    #[pyo3(get)]
    mse: f64,
    #[pyo3(get)]
    psnr_db: f64,
    #[pyo3(get)]
    mssim: f64,
    #[pyo3(get)]
    total_neg_eigs: usize,
}

#[pyclass(frozen, name = "SweepResult")]
struct SweepResult {
    inner: core::SweepResult,
}

#[pymethods]
impl SweepResult {
    #[getter]
    fn table(&self) -> Vec<SweepRow> {
        self.inner
            .table
            .iter()
            .map(|r| SweepRow {
                h: r.h,
                gamma: r.gamma,
                mse: r.mse,
                psnr_db: r.psnr_db,
                mssim: r.mssim,
                total_neg_eigs: r.total_neg_eigs,
            })
            .collect()
    }

    /// `(h, gamma)` of the best cell under `objective`.
    #[pyo3(signature = (objective = None))]
    fn best(&self, objective: Option<&str>) -> PyResult<(f64, f64)> {
        let o = match objective {
            Some(name) => core::Objective::parse(name)
                .ok_or_else(|| ScsaError::new_err(format!("unknown objective `{name}`")))?,
            None => self.inner.objective,
        };
        let cell = self.inner.best(o);
        Ok((cell.h, cell.gamma))
    }

    /// Clamped reconstruction at the best cell of the sweep objective.
    #[getter]
    fn best_pixels(&self) -> Vec<Vec<f64>> {
        lists(self.inner.best_reconstruction.image().pixels())
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

#[pyfunction]
fn semiclassical_constant_1d(gamma: f64) -> PyResult<f64> {
    core::semiclassical_constant_1d(gamma).map_err(to_py)
}

#[pyfunction]
fn semiclassical_constant_2d(gamma: f64) -> PyResult<f64> {
    core::semiclassical_constant_2d(gamma).map_err(to_py)
}

#[pyfunction]
fn reconstruct_1d(samples: Vec<f64>, params: Params) -> PyResult<Vec<f64>> {
    let signal = core::Slice1D::new(samples, params.inner.delta).map_err(to_py)?;
    let out = core::reconstruct_1d(&signal, &params.inner).map_err(to_py)?;
    Ok(out.samples().to_vec())
}

#[pyfunction]
fn reconstruct_2d(py: Python<'_>, pixels: Vec<Vec<f64>>, params: Params) -> PyResult<Reconstruction> {
    let img = image(&pixels, params.inner.delta)?;
    let report = py
        .detach(|| core::reconstruct_2d(&img, &params.inner))
        .map_err(to_py)?;
    Ok(Reconstruction { report })
}

#[pyfunction]
#[pyo3(signature = (pixels, h_values, gamma_values, reference = None, objective = "min-mse", lambda_ = 0.0, delta = 1.0))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    pixels: Vec<Vec<f64>>,
    h_values: Vec<f64>,
    gamma_values: Vec<f64>,
    reference: Option<Vec<Vec<f64>>>,
    objective: &str,
    lambda_: f64,
    delta: f64,
) -> PyResult<SweepResult> {
    let img = image(&pixels, delta)?;
    let reference = match reference {
        Some(r) => image(&r, delta)?,
        None => img.clone(),
    };
    let objective =
        core::Objective::parse(objective).ok_or_else(|| ScsaError::new_err(format!("unknown objective `{objective}`")))?;
    let first_h = h_values.first().copied().unwrap_or(1.0);
    let first_gamma = gamma_values.first().copied().unwrap_or(4.0);
    let spec = core::SweepSpec::new(h_values, gamma_values, objective, reference).map_err(to_py)?;
    let base = core::ScsaParams::new(first_h, first_gamma, lambda_, delta).map_err(to_py)?;
    let inner = py.detach(|| core::sweep(&img, &spec, &base)).map_err(to_py)?;
    Ok(SweepResult { inner })
}

#[pyfunction]
#[pyo3(signature = (pixels, sigma_255, seed, clip = true))]
fn add_noise(pixels: Vec<Vec<f64>>, sigma_255: f64, seed: u64, clip: bool) -> PyResult<Vec<Vec<f64>>> {
    let img = image(&pixels, 1.0)?;
    let mut spec = core::NoiseSpec::new(sigma_255, seed).map_err(to_py)?;
    if !clip {
        spec = spec.without_clipping();
    }
    Ok(lists(&core::noise::noisy_values(&img, &spec)))
}

#[pyfunction]
fn snr_db(clean: Vec<Vec<f64>>, noisy: Vec<Vec<f64>>) -> PyResult<f64> {
    core::snr_db(&matrix(&clean)?, &matrix(&noisy)?).map_err(to_py)
}

#[pyfunction]
fn mse(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    core::mse(&matrix(&a)?, &matrix(&b)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (a, b, intensity_scale = 1.0))]
fn psnr(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, intensity_scale: f64) -> PyResult<f64> {
    core::psnr(&matrix(&a)?, &matrix(&b)?, intensity_scale).map_err(to_py)
}

#[pyfunction]
fn mssim(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    core::mssim(&matrix(&a)?, &matrix(&b)?).map_err(to_py)
}

#[pyfunction]
fn load_image(path: std::path::PathBuf) -> PyResult<Vec<Vec<f64>>> {
    Ok(lists(core::imageio::load(path).map_err(to_py)?.pixels()))
}

/// Writes `pixels` (clamped to [0, 1]) as 8-bit PNG or PGM. The format is
/// taken from `format` or else from the file extension.
#[pyfunction]
#[pyo3(signature = (pixels, path, format = None))]
fn save_image(pixels: Vec<Vec<f64>>, path: std::path::PathBuf, format: Option<&str>) -> PyResult<()> {
    let format = match format {
        Some(name) => core::ImageFormat::parse(name),
        None => core::ImageFormat::from_extension(&path),
    }
    .ok_or_else(|| ScsaError::new_err("cannot determine image format"))?;
    core::imageio::save_values(&matrix(&pixels)?, path, format).map_err(to_py)
}

/// The analytic test surface halved into [0, 1], and its sample spacing.
#[pyfunction]
#[pyo3(signature = (samples = None))]
fn example1(samples: Option<usize>) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let grid = match samples {
        Some(n) => core::GridSpec::example1_with_samples(n).map_err(to_py)?,
        None => core::GridSpec::example1(),
    };
    let scaled = core::example1_image(&grid).map_err(to_py)?;
    Ok((lists(scaled.image.pixels()), grid.ts))
}

#[pyfunction]
#[pyo3(signature = (n = 128, cell = 16, low = 0.3, high = 0.7))]
fn checkerboard(n: usize, cell: usize, low: f64, high: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(lists(core::checkerboard(n, cell, low, high).map_err(to_py)?.pixels()))
}

#[pymodule]
fn scsa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ScsaError", m.py().get_type::<ScsaError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add("PRNG_NAME", core::PRNG_NAME)?;
    m.add_class::<Params>()?;
    m.add_class::<Reconstruction>()?;
    m.add_class::<SweepRow>()?;
    m.add_class::<SweepResult>()?;
    m.add_function(wrap_pyfunction!(semiclassical_constant_1d, m)?)?;
    m.add_function(wrap_pyfunction!(semiclassical_constant_2d, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_1d, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_2d, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(mssim, m)?)?;
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(save_image, m)?)?;
    m.add_function(wrap_pyfunction!(example1, m)?)?;
    m.add_function(wrap_pyfunction!(checkerboard, m)?)?;
    Ok(())
}
