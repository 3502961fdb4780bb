//! Array geometry, scenes and the wavenumber/angle mappings.
//!
//! Steering looks are laid out on a uniform `(kx, ky)` lattice and the look
//! angles are derived from it, so the beam-steered echo lands directly on an
//! FFT-ready grid without any polar-to-Cartesian interpolation.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{ImagingError, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Hard cap on the steering elevation; the `k cos(theta)` correction blows up
/// at grazing incidence.
pub const MAX_THETA_LIMIT: f64 = 85.0 * PI / 180.0;

/// Free-space wavenumber `2*pi*f/c` in rad/m.
pub fn wavenumber(frequency_hz: f64) -> Result<f64> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(ImagingError::InvalidConfig(format!(
            "frequency must be positive, got {frequency_hz}"
        )));
    }
    Ok(2.0 * PI * frequency_hz / SPEED_OF_LIGHT)
}

/// Physical description of the imaging array and target plane.
///
/// Derived quantities (wavelength, wavenumber, aperture half-length) are
/// computed on demand so they can never drift out of sync with the fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagingConfig {
    pub frequency_hz: f64,
    /// Elements per dimension; the array is `n_antennas x n_antennas`.
    pub n_antennas: usize,
    pub spacing_m: f64,
    /// Target standoff.
    pub z0_m: f64,
    /// Focus distance used by reconstruction; `None` means `z0_m`.
    pub z_focus_m: Option<f64>,
    /// Maximum steering elevation.
    pub theta_limit_rad: f64,
    /// Exponent `p` of the `(k cos(theta))^p` amplitude factor shared by the
    /// plane-wave forward model and the beam-steered inversion.
    pub amplitude_exponent: f64,
    /// Per-measurement transmit amplitude of the switched array. The
    /// beam-steered array drives every element at `tx_amplitude / n_antennas`
    /// so both schemes radiate the same total power.
    pub tx_amplitude: f64,
}

impl ImagingConfig {
    /// Builds a validated config with the default steering limit for a scene
    /// centred on the boresight.
    pub fn new(frequency_hz: f64, n_antennas: usize, spacing_m: f64, z0_m: f64) -> Result<Self> {
        let mut cfg = Self {
            frequency_hz,
            n_antennas,
            spacing_m,
            z0_m,
            z_focus_m: None,
            theta_limit_rad: MAX_THETA_LIMIT,
            amplitude_exponent: 1.0,
            tx_amplitude: 1.0,
        };
        cfg.validate()?;
        cfg.theta_limit_rad = default_theta_limit(&cfg, None);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_theta_limit(mut self, theta_limit_rad: f64) -> Result<Self> {
        self.theta_limit_rad = theta_limit_rad;
        self.validate()?;
        Ok(self)
    }

    pub fn with_focus(mut self, z_focus_m: f64) -> Result<Self> {
        self.z_focus_m = Some(z_focus_m);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ImagingError::InvalidConfig(msg));
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return bad(format!("frequency_hz must be positive, got {}", self.frequency_hz));
        }
        if self.n_antennas < 1 {
            return bad("n_antennas must be at least 1".into());
        }
        if !(self.spacing_m > 0.0 && self.spacing_m.is_finite()) {
            return bad(format!("spacing_m must be positive, got {}", self.spacing_m));
        }
        if !(self.z0_m > 0.0 && self.z0_m.is_finite()) {
            return bad(format!("z0_m must be positive, got {}", self.z0_m));
        }
        if let Some(zf) = self.z_focus_m {
            if !(zf > 0.0 && zf.is_finite()) {
                return bad(format!("z_focus_m must be positive, got {zf}"));
            }
        }
        if !(self.theta_limit_rad > 0.0 && self.theta_limit_rad < FRAC_PI_2) {
            return bad(format!(
                "theta_limit_rad must lie in (0, pi/2), got {}",
                self.theta_limit_rad
            ));
        }
        if !self.amplitude_exponent.is_finite() {
            return bad("amplitude_exponent must be finite".into());
        }
        if !(self.tx_amplitude > 0.0 && self.tx_amplitude.is_finite()) {
            return bad(format!("tx_amplitude must be positive, got {}", self.tx_amplitude));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.frequency_hz / SPEED_OF_LIGHT
    }

    /// Aperture half-length `L = (N - 1)/2 * spacing`.
    pub fn half_aperture(&self) -> f64 {
        (self.n_antennas as f64 - 1.0) / 2.0 * self.spacing_m
    }

    pub fn focus(&self) -> f64 {
        self.z_focus_m.unwrap_or(self.z0_m)
    }

    /// Amplitude applied to each element when the whole array transmits.
    pub fn element_amplitude(&self) -> f64 {
        self.tx_amplitude / self.n_antennas as f64
    }

    pub fn n_elements(&self) -> usize {
        self.n_antennas * self.n_antennas
    }
}

/// Element coordinates along one axis, centred on zero.
pub fn element_coordinates(n_antennas: usize, spacing_m: f64) -> Vec<f64> {
    let centre = (n_antennas as f64 - 1.0) / 2.0;
    (0..n_antennas)
        .map(|i| (i as f64 - centre) * spacing_m)
        .collect()
}

/// All `N^2` element positions `(a, b)`, row-major with `b` (y) as the row.
pub fn aperture_positions(config: &ImagingConfig) -> Vec<(f64, f64)> {
    let axis = element_coordinates(config.n_antennas, config.spacing_m);
    axis.iter()
        .flat_map(|&b| axis.iter().map(move |&a| (a, b)))
        .collect()
}

/// Phase weight that steers element `(a, b)` towards `(theta, phi)`.
pub fn steering_weight(position: (f64, f64), theta: f64, phi: f64, k: f64) -> Complex64 {
    let (a, b) = position;
    let st = theta.sin();
    Complex64::from_polar(1.0, -k * (a * st * phi.cos() + b * st * phi.sin()))
}

/// Weights for the whole aperture, in `aperture_positions` order.
pub fn steering_weights(config: &ImagingConfig, theta: f64, phi: f64) -> Vec<Complex64> {
    let k = config.wavenumber();
    aperture_positions(config)
        .into_iter()
        .map(|p| steering_weight(p, theta, phi, k))
        .collect()
}

/// Two-way spatial frequencies `(2k sin(theta) cos(phi), 2k sin(theta) sin(phi))`.
pub fn wavenumbers_from_angles(theta: f64, phi: f64, k: f64) -> (f64, f64) {
    let r = 2.0 * k * theta.sin();
    (r * phi.cos(), r * phi.sin())
}

/// Inverse of [`wavenumbers_from_angles`]; `phi` is in `(-pi, pi]` and zero
/// at the origin.
pub fn angles_from_wavenumbers(kx: f64, ky: f64, k: f64) -> Result<(f64, f64)> {
    let radius = kx.hypot(ky);
    let limit = 2.0 * k;
    if !(radius < limit) {
        return Err(ImagingError::OutsideSteerableDisk { kx, ky, limit });
    }
    let theta = (radius / limit).asin();
    // atan2 distinguishes -0.0; fold it so phi stays in (-pi, pi].
    let phi = if radius == 0.0 {
        0.0
    } else {
        (ky + 0.0).atan2(kx + 0.0)
    };
    Ok((theta, phi))
}

/// Largest elevation for which the stationary point of a target at `(x, y)`
/// still falls inside the aperture.
pub fn theta_max_for_target(x: f64, y: f64, config: &ImagingConfig) -> f64 {
    let l = config.half_aperture();
    let gx = (x + l).abs().min((x - l).abs());
    let gy = (y + l).abs().min((y - l).abs());
    (gx.hypot(gy) / config.z0_m).atan()
}

/// Axis-aligned scene bounds `(x_min, x_max, y_min, y_max)`.
pub type Bounds = (f64, f64, f64, f64);

/// Default steering limit: the largest [`theta_max_for_target`] over the
/// scene bounds (boresight when `None`), capped at [`MAX_THETA_LIMIT`].
pub fn default_theta_limit(config: &ImagingConfig, bounds: Option<Bounds>) -> f64 {
    let l = config.half_aperture();
    // ||x| - L| is maximised at an interval endpoint or at zero.
    let axis_max = |lo: f64, hi: f64| {
        let mut best = ((lo.abs() - l).abs()).max((hi.abs() - l).abs());
        if lo <= 0.0 && hi >= 0.0 {
            best = best.max(l);
        }
        best
    };
    let (gx, gy) = match bounds {
        Some((x0, x1, y0, y1)) => (axis_max(x0, x1), axis_max(y0, y1)),
        None => (l, l),
    };
    let theta = (gx.hypot(gy) / config.z0_m).atan();
    if theta > 0.0 {
        theta.min(MAX_THETA_LIMIT)
    } else {
        MAX_THETA_LIMIT
    }
}

/// Default look-grid size: `2 N` rounded up to a power of two.
pub fn default_grid_size(n_antennas: usize) -> usize {
    (2 * n_antennas.max(1)).next_power_of_two()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflector {
    pub x: f64,
    pub y: f64,
    pub amplitude: Complex64,
}

impl Reflector {
    pub fn new(x: f64, y: f64, amplitude: Complex64) -> Self {
        Self { x, y, amplitude }
    }

    pub fn unit(x: f64, y: f64) -> Self {
        Self::new(x, y, Complex64::new(1.0, 0.0))
    }
}

/// Reflectivity sampled on a regular grid; `origin` is the centre of pixel
/// `[0, 0]`, rows run along y.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterScene {
    pub pixels: Array2<Complex64>,
    pub pitch: f64,
    pub origin: (f64, f64),
}

/// Planar reflectivity `f(x, y)` at the target standoff.
#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    Points(Vec<Reflector>),
    Raster(RasterScene),
}

impl Scene {
    pub fn points(reflectors: Vec<Reflector>) -> Result<Self> {
        if let Some(r) = reflectors
            .iter()
            .find(|r| !(r.x.is_finite() && r.y.is_finite()))
        {
            return Err(ImagingError::InvalidConfig(format!(
                "reflector coordinates must be finite, got ({}, {})",
                r.x, r.y
            )));
        }
        Ok(Scene::Points(reflectors))
    }

    pub fn raster(pixels: Array2<Complex64>, pitch: f64, origin: (f64, f64)) -> Result<Self> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(ImagingError::InvalidConfig(format!(
                "raster pitch must be positive, got {pitch}"
            )));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(ImagingError::InvalidConfig("raster origin must be finite".into()));
        }
        Ok(Scene::Raster(RasterScene {
            pixels,
            pitch,
            origin,
        }))
    }

    /// Point-reflector view; raster scenes become one reflector per nonzero
    /// pixel centre.
    pub fn reflectors(&self) -> Vec<Reflector> {
        match self {
            Scene::Points(r) => r.clone(),
            Scene::Raster(raster) => raster
                .pixels
                .indexed_iter()
                .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                .map(|((row, col), &v)| {
                    Reflector::new(
                        raster.origin.0 + col as f64 * raster.pitch,
                        raster.origin.1 + row as f64 * raster.pitch,
                        v,
                    )
                })
                .collect(),
        }
    }

    pub fn bounds(&self) -> Option<Bounds> {
        let refl = self.reflectors();
        if refl.is_empty() {
            return None;
        }
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for r in &refl {
            b.0 = b.0.min(r.x);
            b.1 = b.1.max(r.x);
            b.2 = b.2.min(r.y);
            b.3 = b.3.max(r.y);
        }
        Some(b)
    }
}

/// One steerable look on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Look {
    pub ix: usize,
    pub iy: usize,
    pub kx: f64,
    pub ky: f64,
    pub theta: f64,
    pub phi: f64,
}

/// `M x M` lattice of two-way wavenumbers `k_i = (i - floor(M/2)) * dk` with
/// `dk = 2K/M`, `K = 2k sin(theta_limit)`; points on or beyond radius `K` are
/// masked.
#[derive(Debug, Clone)]
pub struct SteeringGrid {
    pub size: usize,
    pub delta_k: f64,
    pub k_max: f64,
    pub axis: Vec<f64>,
    /// `mask[[iy, ix]]` is true for steerable (unmasked) points.
    pub mask: Array2<bool>,
    pub looks: Vec<Look>,
}

impl SteeringGrid {
    pub fn n_looks(&self) -> usize {
        self.looks.len()
    }

    pub fn kx(&self, ix: usize) -> f64 {
        self.axis[ix]
    }

    pub fn ky(&self, iy: usize) -> f64 {
        self.axis[iy]
    }
}

/// Signed lattice offset of index `i` on an axis of length `size`.
pub fn centered_index(i: usize, size: usize) -> isize {
    i as isize - (size / 2) as isize
}

pub fn build_steering_grid(config: &ImagingConfig, grid_size: usize) -> Result<SteeringGrid> {
    if grid_size < 2 {
        return Err(ImagingError::InvalidConfig(format!(
            "grid size must be at least 2, got {grid_size}"
        )));
    }
    config.validate()?;
    let k = config.wavenumber();
    let k_max = 2.0 * k * config.theta_limit_rad.sin();
    let delta_k = 2.0 * k_max / grid_size as f64;
    let axis: Vec<f64> = (0..grid_size)
        .map(|i| centered_index(i, grid_size) as f64 * delta_k)
        .collect();
    let mut mask = Array2::from_elem((grid_size, grid_size), false);
    let mut looks = Vec::new();
    for iy in 0..grid_size {
        for ix in 0..grid_size {
            let (kx, ky) = (axis[ix], axis[iy]);
            if kx.hypot(ky) < k_max {
                let (theta, phi) = angles_from_wavenumbers(kx, ky, k)?;
                mask[[iy, ix]] = true;
                looks.push(Look {
                    ix,
                    iy,
                    kx,
                    ky,
                    theta,
                    phi,
                });
            }
        }
    }
    Ok(SteeringGrid {
        size: grid_size,
        delta_k,
        k_max,
        axis,
        mask,
        looks,
    })
}

/// Look angles whose two-way wavenumbers `2k sin(theta)` are uniformly spaced
/// over `[-K, K)` with `K = 2k sin(theta_limit)`, for the linear-array model.
pub fn uniform_theta_grid(k: f64, theta_limit: f64, size: usize) -> Vec<f64> {
    let k_max = 2.0 * k * theta_limit.sin();
    let dk = 2.0 * k_max / size as f64;
    (0..size)
        .map(|i| (centered_index(i, size) as f64 * dk / (2.0 * k)).asin())
        .collect()
}
