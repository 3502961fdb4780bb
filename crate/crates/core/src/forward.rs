//! Synthetic measurements for the beam-steered and switched acquisitions.
//!
//! The element-sum models replace the aperture integrals by sums over the
//! physical `N x N` element grid and keep only the phase of each path (no
//! spherical spreading loss). The plane-wave model evaluates the closed-form
//! point response and serves as the oracle for the element-sum model.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{ImagingError, Result};
use crate::impairments::{complex_gaussian, noise_variance, ImpairmentSpec, WeightDistortion};
use crate::model::{element_coordinates, ImagingConfig, Reflector, Scene, SteeringGrid};
use crate::rng::{substream, StreamTag};

/// Smallest `cos(theta)` accepted by the plane-wave model.
pub const MIN_COS_THETA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EchoKind {
    Beamsteered2d,
    Switched2d,
    Beamsteered1d,
}

impl EchoKind {
    pub fn name(self) -> &'static str {
        match self {
            EchoKind::Beamsteered2d => "beamsteered-2d",
            EchoKind::Switched2d => "switched-2d",
            EchoKind::Beamsteered1d => "beamsteered-1d",
        }
    }
}

/// Complex measurements. Beam-steered data is indexed `[iy, ix]` on the
/// steering lattice (zero at masked points), switched data `[row, col]` on
/// the element grid, and 1D data is a single row over the look angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoData {
    pub kind: EchoKind,
    pub samples: Array2<Complex64>,
}

impl EchoData {
    pub fn expect_kind(&self, kind: EchoKind) -> Result<()> {
        if self.kind != kind {
            return Err(ImagingError::WrongEchoKind {
                expected: kind.name(),
                actual: self.kind.name(),
            });
        }
        Ok(())
    }

    pub fn row(&self) -> Vec<Complex64> {
        self.samples.iter().copied().collect()
    }
}

/// `exp(-j * scale * k * r)` from every reflector to every element, laid out
/// reflector-major.
fn path_phasors(refl: &[Reflector], config: &ImagingConfig, scale: f64) -> Vec<Complex64> {
    let k = config.wavenumber();
    let axis = element_coordinates(config.n_antennas, config.spacing_m);
    let z2 = config.z0_m * config.z0_m;
    let mut out = Vec::with_capacity(refl.len() * axis.len() * axis.len());
    for r in refl {
        for &b in &axis {
            for &a in &axis {
                let d = ((r.x - a).powi(2) + (r.y - b).powi(2) + z2).sqrt();
                out.push(Complex64::from_polar(1.0, -scale * k * d));
            }
        }
    }
    out
}

#[inline]
fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

/// Field incident on `point` when every element radiates with its weight
/// (scaled by the per-element amplitude).
pub fn transmit_field(
    point: (f64, f64),
    weights: &[Complex64],
    config: &ImagingConfig,
) -> Result<Complex64> {
    config.validate()?;
    if weights.len() != config.n_elements() {
        return Err(ImagingError::DimensionMismatch {
            expected: config.n_elements(),
            actual: weights.len(),
        });
    }
    let paths = path_phasors(&[Reflector::unit(point.0, point.1)], config, 1.0);
    Ok(config.element_amplitude() * dot(&paths, weights))
}

/// Mean noiseless per-sample power of the switched acquisition of `refl`.
///
/// Both acquisitions use this as the receiver-noise reference so they share a
/// common noise floor.
pub fn reference_signal_power(refl: &[Reflector], config: &ImagingConfig) -> f64 {
    let n_el = config.n_elements();
    if refl.is_empty() {
        return 0.0;
    }
    let paths = path_phasors(refl, config, 2.0);
    let total: f64 = (0..n_el)
        .map(|e| {
            let s: Complex64 = refl
                .iter()
                .enumerate()
                .map(|(i, r)| r.amplitude * paths[i * n_el + e])
                .sum();
            (config.tx_amplitude * s).norm_sqr()
        })
        .sum();
    total / n_el as f64
}

fn receiver_noise_variance(refl: &[Reflector], config: &ImagingConfig, imp: &ImpairmentSpec) -> f64 {
    match imp.snr_db {
        Some(snr) if snr.is_finite() && !refl.is_empty() => {
            let p = reference_signal_power(refl, config);
            if p > 0.0 {
                noise_variance(p, snr)
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Per-element phases that steer the array to two-way wavenumber `(kx, ky)`.
fn ideal_phases(axis: &[f64], kx: f64, ky: f64) -> Vec<f64> {
    axis.iter()
        .flat_map(|&b| axis.iter().map(move |&a| -(a * kx + b * ky) / 2.0))
        .collect()
}

fn distorted_weights(
    phases: &[f64],
    dist: &WeightDistortion,
    draws: Option<&[f64]>,
) -> Vec<Complex64> {
    match draws {
        Some(z) => phases.iter().zip(z).map(|(&p, &z)| dist.weight(p, z)).collect(),
        None => phases.iter().map(|&p| dist.weight(p, 0.0)).collect(),
    }
}

fn normal_draws<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Transmit and receive weights for one look, with impairments applied.
fn look_weights(
    phases: &[f64],
    dist: &WeightDistortion,
    imp: &ImpairmentSpec,
    key: &[u64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    if dist.sigma == 0.0 {
        let w = distorted_weights(phases, dist, None);
        return (w.clone(), w);
    }
    let n = phases.len();
    let z_tx = normal_draws(&mut substream(imp.seed, StreamTag::TxPhase, key), n);
    let tx = distorted_weights(phases, dist, Some(&z_tx));
    let rx = if imp.independent_tx_rx {
        let z_rx = normal_draws(&mut substream(imp.seed, StreamTag::RxPhase, key), n);
        distorted_weights(phases, dist, Some(&z_rx))
    } else {
        tx.clone()
    };
    (tx, rx)
}

/// Element-sum beam-steered echo over every unmasked look of `grid`.
///
/// Receiver noise is added at each element before receive weighting, fresh
/// for every look.
pub fn beamsteer_echo(
    scene: &Scene,
    grid: &SteeringGrid,
    config: &ImagingConfig,
    imp: &ImpairmentSpec,
) -> Result<EchoData> {
    config.validate()?;
    imp.validate()?;
    let refl = scene.reflectors();
    let n_el = config.n_elements();
    let axis = element_coordinates(config.n_antennas, config.spacing_m);
    let paths = path_phasors(&refl, config, 1.0);
    let dist = WeightDistortion::from_spec(imp, config.frequency_hz);
    let noise_var = receiver_noise_variance(&refl, config, imp);
    let a_b = config.element_amplitude();

    let values: Vec<Complex64> = grid
        .looks
        .par_iter()
        .map(|look| {
            let key = [look.iy as u64, look.ix as u64];
            let phases = ideal_phases(&axis, look.kx, look.ky);
            let (tx, rx) = look_weights(&phases, &dist, imp, &key);
            let mut s = Complex64::new(0.0, 0.0);
            for (i, r) in refl.iter().enumerate() {
                let p = &paths[i * n_el..(i + 1) * n_el];
                s += r.amplitude * (a_b * dot(p, &tx)) * dot(p, &rx);
            }
            if noise_var > 0.0 {
                let mut rng = substream(imp.seed, StreamTag::ReceiverNoise, &key);
                for w in &rx {
                    s += w * complex_gaussian(noise_var, &mut rng);
                }
            }
            s
        })
        .collect();

    let mut samples = Array2::zeros((grid.size, grid.size));
    for (look, v) in grid.looks.iter().zip(values) {
        samples[[look.iy, look.ix]] = v;
    }
    Ok(EchoData {
        kind: EchoKind::Beamsteered2d,
        samples,
    })
}

/// Closed-form plane-wave echo:
/// `(k cos(theta))^-p * sum_i f_i exp(-j (kx x_i + ky y_i + 2 k z0 cos(theta)))`.
pub fn ideal_echo(scene: &Scene, grid: &SteeringGrid, config: &ImagingConfig) -> Result<EchoData> {
    config.validate()?;
    let refl = scene.reflectors();
    let k = config.wavenumber();
    let p = config.amplitude_exponent;
    let mut samples = Array2::zeros((grid.size, grid.size));
    for look in &grid.looks {
        let c = look.theta.cos();
        if c < MIN_COS_THETA {
            return Err(ImagingError::GrazingAngle { theta: look.theta });
        }
        let amp = (k * c).powf(-p);
        let s: Complex64 = refl
            .iter()
            .map(|r| {
                r.amplitude
                    * Complex64::from_polar(1.0, -(look.kx * r.x + look.ky * r.y + 2.0 * k * config.z0_m * c))
            })
            .sum();
        samples[[look.iy, look.ix]] = amp * s;
    }
    Ok(EchoData {
        kind: EchoKind::Beamsteered2d,
        samples,
    })
}

/// Switched-array echo: one colocated transmit/receive element at a time.
pub fn switched_echo(scene: &Scene, config: &ImagingConfig, imp: &ImpairmentSpec) -> Result<EchoData> {
    config.validate()?;
    imp.validate()?;
    let refl = scene.reflectors();
    let n = config.n_antennas;
    let n_el = n * n;
    let paths = path_phasors(&refl, config, 2.0);
    let noise_var = receiver_noise_variance(&refl, config, imp);
    let samples = Array2::from_shape_fn((n, n), |(row, col)| {
        let e = row * n + col;
        let mut s: Complex64 = refl
            .iter()
            .enumerate()
            .map(|(i, r)| r.amplitude * paths[i * n_el + e])
            .sum::<Complex64>()
            * config.tx_amplitude;
        if noise_var > 0.0 {
            let mut rng = substream(imp.seed, StreamTag::SwitchedNoise, &[row as u64, col as u64]);
            s += complex_gaussian(noise_var, &mut rng);
        }
        s
    });
    Ok(EchoData {
        kind: EchoKind::Switched2d,
        samples,
    })
}

/// Reflector on the x axis of the linear-array model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineReflector {
    pub x: f64,
    pub amplitude: Complex64,
}

/// Phase-noise draw selection for the linear-array model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePhaseNoise {
    pub sigma_phi: f64,
    pub seed: u64,
    pub trial: u64,
    pub independent_tx_rx: bool,
}

impl LinePhaseNoise {
    pub fn off() -> Self {
        Self {
            sigma_phi: 0.0,
            seed: 0,
            trial: 0,
            independent_tx_rx: true,
        }
    }
}

/// Beam-steered echo of a linear array of `n_antennas` elements on the x axis,
/// with Gaussian phase noise on every transmit and receive weight.
pub fn beamsteer_echo_1d(
    scene: &[LineReflector],
    theta_grid: &[f64],
    config: &ImagingConfig,
    noise: &LinePhaseNoise,
) -> Result<EchoData> {
    config.validate()?;
    if let Some(&t) = theta_grid.iter().find(|t| !(t.abs() < std::f64::consts::FRAC_PI_2)) {
        return Err(ImagingError::GrazingAngle { theta: t });
    }
    let k = config.wavenumber();
    let axis = element_coordinates(config.n_antennas, config.spacing_m);
    let n = axis.len();
    let z2 = config.z0_m * config.z0_m;
    let paths: Vec<Vec<Complex64>> = scene
        .iter()
        .map(|r| {
            axis.iter()
                .map(|&u| Complex64::from_polar(1.0, -k * ((r.x - u).powi(2) + z2).sqrt()))
                .collect()
        })
        .collect();

    let mut samples = Array2::zeros((1, theta_grid.len()));
    for (i, &theta) in theta_grid.iter().enumerate() {
        let ks = k * theta.sin();
        let ideal: Vec<f64> = axis.iter().map(|&u| -ks * u).collect();
        let (tx, rx) = if noise.sigma_phi == 0.0 {
            let w: Vec<Complex64> = ideal.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
            (w.clone(), w)
        } else {
            let key = [noise.trial, i as u64];
            let draw = |tag| -> Vec<Complex64> {
                let mut rng = substream(noise.seed, tag, &key);
                ideal
                    .iter()
                    .map(|&p| {
                        let z: f64 = rng.sample(StandardNormal);
                        Complex64::from_polar(1.0, p - noise.sigma_phi * z)
                    })
                    .collect()
            };
            let tx = draw(StreamTag::TxPhase);
            let rx = if noise.independent_tx_rx {
                draw(StreamTag::RxPhase)
            } else {
                tx.clone()
            };
            (tx, rx)
        };
        debug_assert_eq!(tx.len(), n);
        samples[[0, i]] = scene
            .iter()
            .zip(&paths)
            .map(|(r, p)| r.amplitude * dot(p, &rx) * dot(p, &tx))
            .sum();
    }
    Ok(EchoData {
        kind: EchoKind::Beamsteered1d,
        samples,
    })
}
