//! Python bindings for `imgsim-core`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use imgsim_core::analysis::{self, BreakpointParams, SslCurve};
use imgsim_core::experiments::{self, Subcommand};
use imgsim_core::model::build_steering_grid;
use imgsim_core::reconstruction::{reconstruct_beamsteer, reconstruct_switched_mf, reconstruct_switched_spectral};
use imgsim_core::{forward, impairments, ImagingError, ImpairmentSpec, Reflector, Scene};

fn err(e: ImagingError) -> PyErr {
    match e {
        ImagingError::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "ImagingConfig", frozen, from_py_object)]
#[derive(Clone)]
struct PyImagingConfig {
    inner: imgsim_core::ImagingConfig,
}

#[pymethods]
impl PyImagingConfig {
    #[new]
    #[pyo3(signature = (frequency_hz, n_antennas, spacing_m, z0_m, theta_limit_rad=None, z_focus_m=None))]
    fn new(
        frequency_hz: f64,
        n_antennas: usize,
        spacing_m: f64,
        z0_m: f64,
        theta_limit_rad: Option<f64>,
        z_focus_m: Option<f64>,
    ) -> PyResult<Self> {
        let mut inner = imgsim_core::ImagingConfig::new(frequency_hz, n_antennas, spacing_m, z0_m).map_err(err)?;
        if let Some(t) = theta_limit_rad {
            inner = inner.with_theta_limit(t).map_err(err)?;
        }
        if let Some(z) = z_focus_m {
            inner = inner.with_focus(z).map_err(err)?;
        }
        Ok(Self { inner })
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.frequency_hz
    }

    #[getter]
    fn n_antennas(&self) -> usize {
        self.inner.n_antennas
    }

    #[getter]
    fn spacing_m(&self) -> f64 {
        self.inner.spacing_m
    }

    #[getter]
    fn z0_m(&self) -> f64 {
        self.inner.z0_m
    }

    #[getter]
    fn theta_limit_rad(&self) -> f64 {
        self.inner.theta_limit_rad
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength()
    }

    #[getter]
    fn wavenumber(&self) -> f64 {
        self.inner.wavenumber()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "ImagingConfig(frequency_hz={}, n_antennas={}, spacing_m={}, z0_m={}, theta_limit_rad={})",
            c.frequency_hz, c.n_antennas, c.spacing_m, c.z0_m, c.theta_limit_rad
        )
    }
}

#[pyclass(name = "Image", frozen, skip_from_py_object)]
struct PyImage {
    inner: imgsim_core::Image,
}

#[pymethods]
impl PyImage {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.pixels.dim()
    }

    #[getter]
    fn pitch(&self) -> (f64, f64) {
        self.inner.pitch
    }

    #[getter]
    fn origin(&self) -> (f64, f64) {
        self.inner.origin
    }

    #[getter]
    fn provenance(&self) -> &'static str {
        self.inner.provenance.name()
    }

    /// Complex pixels as a list of rows.
    fn pixels(&self) -> Vec<Vec<Complex64>> {
        self.inner.pixels.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    fn magnitude(&self) -> Vec<Vec<f64>> {
        self.inner.magnitude().rows().into_iter().map(|r| r.to_vec()).collect()
    }

    /// `(x_m, y_m, magnitude)` of the brightest pixel.
    fn peak(&self) -> Option<(f64, f64, f64)> {
        self.inner
            .peak()
            .map(|(r, c, m)| (self.inner.x(c), self.inner.y(r), m))
    }

    fn __repr__(&self) -> String {
        let (rows, cols) = self.inner.pixels.dim();
        format!("Image({rows}x{cols}, provenance={})", self.inner.provenance.name())
    }
}

fn scene(reflectors: Vec<(f64, f64, Complex64)>) -> PyResult<Scene> {
    Scene::points(
        reflectors
            .into_iter()
            .map(|(x, y, a)| Reflector::new(x, y, a))
            .collect(),
    )
    .map_err(err)
}

fn impairment_spec(snr_db: Option<f64>, phase_bits: Option<u32>, sigma_phi_rad: f64, seed: u64) -> PyResult<ImpairmentSpec> {
    let s = ImpairmentSpec {
        snr_db,
        phase_bits,
        sigma_phi: sigma_phi_rad,
        seed,
        ..ImpairmentSpec::none()
    };
    s.validate().map_err(err)?;
    Ok(s)
}

/// Simulates and reconstructs a beam-steered acquisition of point
/// reflectors given as `(x_m, y_m, amplitude)`.
#[pyfunction]
#[pyo3(signature = (config, reflectors, grid_size=None, snr_db=None, phase_bits=None, sigma_phi_rad=0.0, seed=0))]
fn image_beamsteer(
    py: Python<'_>,
    config: &PyImagingConfig,
    reflectors: Vec<(f64, f64, Complex64)>,
    grid_size: Option<usize>,
    snr_db: Option<f64>,
    phase_bits: Option<u32>,
    sigma_phi_rad: f64,
    seed: u64,
) -> PyResult<PyImage> {
    let cfg = &config.inner;
    let scene = scene(reflectors)?;
    let imp = impairment_spec(snr_db, phase_bits, sigma_phi_rad, seed)?;
    let size = grid_size.unwrap_or_else(|| imgsim_core::model::default_grid_size(cfg.n_antennas));
    let inner = py
        .detach(|| {
            let grid = build_steering_grid(cfg, size)?;
            let echo = forward::beamsteer_echo(&scene, &grid, cfg, &imp)?;
            reconstruct_beamsteer(&echo, &grid, cfg, cfg.focus())
        })
        .map_err(err)?;
    Ok(PyImage { inner })
}

/// Switched-array counterpart of `image_beamsteer`; `method` is
/// `"matched_filter"` or `"spectral"`.
#[pyfunction]
#[pyo3(signature = (config, reflectors, method="matched_filter", snr_db=None, seed=0))]
fn image_switched(
    py: Python<'_>,
    config: &PyImagingConfig,
    reflectors: Vec<(f64, f64, Complex64)>,
    method: &str,
    snr_db: Option<f64>,
    seed: u64,
) -> PyResult<PyImage> {
    let cfg = &config.inner;
    let scene = scene(reflectors)?;
    let imp = impairment_spec(snr_db, None, 0.0, seed)?;
    let spectral = match method {
        "matched_filter" => false,
        "spectral" => true,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    let inner = py
        .detach(|| {
            let echo = forward::switched_echo(&scene, cfg, &imp)?;
            if spectral {
                reconstruct_switched_spectral(&echo, cfg, cfg.focus())
            } else {
                reconstruct_switched_mf(&echo, cfg, cfg.focus())
            }
        })
        .map_err(err)?;
    Ok(PyImage { inner })
}

#[pyfunction]
fn jitter_to_sigma(frequency_hz: f64, jitter_s: f64) -> f64 {
    impairments::jitter_to_sigma(frequency_hz, jitter_s)
}

#[pyfunction]
fn array_gain_db(n_antennas: usize) -> f64 {
    analysis::array_gain_db(n_antennas)
}

#[pyfunction]
fn resolution_switched(config: &PyImagingConfig) -> f64 {
    analysis::resolution_switched(&config.inner)
}

#[pyfunction]
fn resolution_beamsteer(x_m: f64, y_m: f64, config: &PyImagingConfig) -> PyResult<f64> {
    analysis::resolution_beamsteer(x_m, y_m, &config.inner).map_err(err)
}

/// Sidelobe suppression level (dB) of a sampled pattern magnitude.
#[pyfunction]
fn ssl(profile: Vec<f64>) -> PyResult<f64> {
    analysis::ssl(&profile).map_err(err)
}

/// SSL against phase-noise sigma for the default constant-aperture study.
#[pyfunction]
#[pyo3(signature = (n_antennas, sigmas, trials=200, seed=1))]
fn ssl_sweep(py: Python<'_>, n_antennas: usize, sigmas: Vec<f64>, trials: usize, seed: u64) -> PyResult<Vec<f64>> {
    let study = analysis::PsfStudy::default();
    py.detach(|| analysis::ssl_sweep(&study, n_antennas, &sigmas, trials, seed))
        .map(|c| c.ssl_db)
        .map_err(err)
}

/// `(sigma_sb, sigma_tb, slope, intercept, floor_db)` for one SSL curve.
#[pyfunction]
fn breakpoint_fit(sigmas: Vec<f64>, ssl_db: Vec<f64>) -> PyResult<(f64, f64, f64, f64, f64)> {
    let curve = SslCurve {
        n_antennas: 0,
        trials: 0,
        seed: 0,
        sigma_values: sigmas,
        ssl_db,
    };
    let r = analysis::breakpoint_fit(&curve, &BreakpointParams::default()).map_err(err)?;
    Ok((r.sigma_sb, r.sigma_tb, r.fit_slope, r.fit_intercept, r.floor_db))
}

/// Runs a CLI subcommand; returns the paths written.
#[pyfunction]
#[pyo3(signature = (subcommand, config_path, out_dir, scene=None, seed=None))]
fn run_experiment(
    py: Python<'_>,
    subcommand: &str,
    config_path: PathBuf,
    out_dir: PathBuf,
    scene: Option<String>,
    seed: Option<u64>,
) -> PyResult<Vec<PathBuf>> {
    let sub: Subcommand = subcommand.parse().map_err(err)?;
    let opts = experiments::load_run_options(&config_path, scene, seed, Some(out_dir)).map_err(err)?;
    py.detach(|| experiments::run_experiment(sub, &opts)).map_err(err)
}

#[pymodule]
fn imgsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImagingConfig>()?;
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(image_beamsteer, m)?)?;
    m.add_function(wrap_pyfunction!(image_switched, m)?)?;
    m.add_function(wrap_pyfunction!(jitter_to_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(array_gain_db, m)?)?;
    m.add_function(wrap_pyfunction!(resolution_switched, m)?)?;
    m.add_function(wrap_pyfunction!(resolution_beamsteer, m)?)?;
    m.add_function(wrap_pyfunction!(ssl, m)?)?;
    m.add_function(wrap_pyfunction!(ssl_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(breakpoint_fit, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
