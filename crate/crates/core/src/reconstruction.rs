//! Echo inversion: beam-steered inverse transform with amplitude/phase
//! correction, switched-array matched filter and corrected spectral
//! inversion, and the linear-array profile used for PSF studies.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{ImagingError, Result};
use crate::forward::{EchoData, EchoKind};
use crate::model::{centered_index, element_coordinates, ImagingConfig, SteeringGrid};
use crate::spectral::{dft2, idft, idft2, wrap_index};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Beamsteer,
    SwitchedMatchedFilter,
    SwitchedSpectral,
    Raster,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Beamsteer => "beamsteer",
            Provenance::SwitchedMatchedFilter => "switched-mf",
            Provenance::SwitchedSpectral => "switched-spectral",
            Provenance::Raster => "raster",
        }
    }
}

/// Reconstructed reflectivity. `pixels[[row, col]]` sits at
/// `(origin.0 + col * pitch.0, origin.1 + row * pitch.1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub pixels: Array2<Complex64>,
    pub pitch: (f64, f64),
    pub origin: (f64, f64),
    pub provenance: Provenance,
}

impl Image {
    pub fn x(&self, col: usize) -> f64 {
        self.origin.0 + col as f64 * self.pitch.0
    }

    pub fn y(&self, row: usize) -> f64 {
        self.origin.1 + row as f64 * self.pitch.1
    }

    pub fn magnitude(&self) -> Array2<f64> {
        self.pixels.mapv(|v| v.norm())
    }

    /// Brightest pixel `(row, col, magnitude)`; `None` for an all-zero image.
    pub fn peak(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for ((r, c), v) in self.pixels.indexed_iter() {
            let m = v.norm();
            if m > best.map_or(0.0, |b| b.2) {
                best = Some((r, c, m));
            }
        }
        best
    }

    /// Pixel nearest to `(x, y)`, clamped to the image.
    pub fn pixel_of(&self, x: f64, y: f64) -> (usize, usize) {
        let (rows, cols) = self.pixels.dim();
        let col = ((x - self.origin.0) / self.pitch.0).round().clamp(0.0, (cols - 1) as f64);
        let row = ((y - self.origin.1) / self.pitch.1).round().clamp(0.0, (rows - 1) as f64);
        (row as usize, col as usize)
    }
}

/// Re-centres an FFT output so that index `floor(n/2)` holds lag zero.
fn centre(buf: &Array2<Complex64>, rows: usize, cols: usize) -> Array2<Complex64> {
    let (pr, pc) = buf.dim();
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        buf[[
            wrap_index(centered_index(r, rows), pr),
            wrap_index(centered_index(c, cols), pc),
        ]]
    })
}

/// Inverse-transform reconstruction from beam-steered data on `grid`.
///
/// Each look is weighted by `(k cos(theta))^p exp(+2j k z_f cos(theta))`;
/// masked points contribute nothing.
pub fn reconstruct_beamsteer(
    echo: &EchoData,
    grid: &SteeringGrid,
    config: &ImagingConfig,
    z_f: f64,
) -> Result<Image> {
    echo.expect_kind(EchoKind::Beamsteered2d)?;
    let m = grid.size;
    if echo.samples.dim() != (m, m) {
        return Err(ImagingError::DimensionMismatch {
            expected: m * m,
            actual: echo.samples.len(),
        });
    }
    let k = config.wavenumber();
    let p = config.amplitude_exponent;
    let mut spectrum = Array2::zeros((m, m));
    for look in &grid.looks {
        let c = look.theta.cos();
        let corr = (k * c).powf(p) * Complex64::from_polar(1.0, 2.0 * k * z_f * c);
        spectrum[[
            wrap_index(centered_index(look.iy, m), m),
            wrap_index(centered_index(look.ix, m), m),
        ]] = echo.samples[[look.iy, look.ix]] * corr;
    }
    let img = idft2(&spectrum)?;
    let pitch = 2.0 * PI / (m as f64 * grid.delta_k);
    let origin = -((m / 2) as f64) * pitch;
    Ok(Image {
        pixels: centre(&img, m, m),
        pitch: (pitch, pitch),
        origin: (origin, origin),
        provenance: Provenance::Beamsteer,
    })
}

/// Switched-array point response `exp(-j 2k sqrt(x^2 + y^2 + z_f^2))` on the
/// element grid.
pub fn impulse_response(config: &ImagingConfig, z_f: f64) -> Array2<Complex64> {
    let k = config.wavenumber();
    let axis = element_coordinates(config.n_antennas, config.spacing_m);
    let n = axis.len();
    Array2::from_shape_fn((n, n), |(row, col)| {
        let d = (axis[col].powi(2) + axis[row].powi(2) + z_f * z_f).sqrt();
        Complex64::from_polar(1.0, -2.0 * k * d)
    })
}

fn padded(data: &Array2<Complex64>, size: usize) -> Array2<Complex64> {
    let mut out = Array2::zeros((size, size));
    out.slice_mut(ndarray::s![..data.nrows(), ..data.ncols()]).assign(data);
    out
}

fn check_switched(echo: &EchoData, config: &ImagingConfig) -> Result<usize> {
    echo.expect_kind(EchoKind::Switched2d)?;
    let n = config.n_antennas;
    if echo.samples.dim() != (n, n) {
        return Err(ImagingError::DimensionMismatch {
            expected: n * n,
            actual: echo.samples.len(),
        });
    }
    Ok(n)
}

/// Matched filter: `idft2(dft2(s) * conj(dft2(h_zf)))` with both zero-padded
/// to `2N` per axis, cropped to the `N x N` window of lags around zero.
pub fn reconstruct_switched_mf(echo: &EchoData, config: &ImagingConfig, z_f: f64) -> Result<Image> {
    let n = check_switched(echo, config)?;
    let size = 2 * n;
    let s = dft2(&padded(&echo.samples, size))?;
    let h = dft2(&padded(&impulse_response(config, z_f), size))?;
    let product = ndarray::Zip::from(&s).and(&h).map_collect(|a, b| a * b.conj());
    let corr = idft2(&product)?;
    let pitch = config.spacing_m;
    let origin = -((n / 2) as f64) * pitch;
    Ok(Image {
        pixels: centre(&corr, n, n),
        pitch: (pitch, pitch),
        origin: (origin, origin),
        provenance: Provenance::SwitchedMatchedFilter,
    })
}

/// Spectral inversion with amplitude `1/kz` and phase `exp(+j kz z_f)` inside
/// the visible disk `kx^2 + ky^2 < (2k)^2`; everything else is zeroed.
///
/// Uses the same padding and output window as the matched filter so the two
/// images share axes.
pub fn reconstruct_switched_spectral(
    echo: &EchoData,
    config: &ImagingConfig,
    z_f: f64,
) -> Result<Image> {
    let n = check_switched(echo, config)?;
    let size = 2 * n;
    let dx = config.spacing_m;
    let two_k = 2.0 * config.wavenumber();
    // spatial position of element index 0
    let x0 = element_coordinates(n, dx)[0];
    let dk = 2.0 * PI / (size as f64 * dx);
    let freq = |i: usize| {
        let signed = if i < size / 2 {
            i as f64
        } else {
            i as f64 - size as f64
        };
        signed * dk
    };
    let mut spectrum = dft2(&padded(&echo.samples, size))?;
    for ((r, c), v) in spectrum.indexed_iter_mut() {
        let (kx, ky) = (freq(c), freq(r));
        let rad2 = kx * kx + ky * ky;
        if rad2 < two_k * two_k {
            let kz = (two_k * two_k - rad2).sqrt();
            *v *= Complex64::from_polar(1.0 / kz, kz * z_f - (kx + ky) * x0);
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let img = idft2(&spectrum)?;
    let origin = -((n / 2) as f64) * dx;
    Ok(Image {
        pixels: centre(&img, n, n),
        pitch: (dx, dx),
        origin: (origin, origin),
        provenance: Provenance::SwitchedSpectral,
    })
}

/// Reconstructed 1D reflectivity; `values[i]` sits at `origin + i * pitch`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub values: Vec<Complex64>,
    pub pitch: f64,
    pub origin: f64,
}

impl Profile {
    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.pitch
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

/// Two-way wavenumbers `2k sin(theta)` and their common spacing.
pub fn line_wavenumbers(theta_grid: &[f64], k: f64) -> Result<(Vec<f64>, f64)> {
    if theta_grid.len() < 2 {
        return Err(ImagingError::Empty("need at least two look angles"));
    }
    let kx: Vec<f64> = theta_grid.iter().map(|t| 2.0 * k * t.sin()).collect();
    let dk = kx[1] - kx[0];
    if !(dk > 0.0) {
        return Err(ImagingError::NonUniformGrid { index: 1 });
    }
    for (i, w) in kx.windows(2).enumerate() {
        if ((w[1] - w[0]) - dk).abs() > 1e-9 * dk {
            return Err(ImagingError::NonUniformGrid { index: i + 1 });
        }
    }
    Ok((kx, dk))
}

/// Linear-array reconstruction: `(k cos(theta))^p exp(+2j k z_f cos(theta))`
/// correction followed by a 1D inverse transform.
pub fn reconstruct_1d(
    echo: &EchoData,
    theta_grid: &[f64],
    config: &ImagingConfig,
    z_f: f64,
) -> Result<Profile> {
    echo.expect_kind(EchoKind::Beamsteered1d)?;
    let m = theta_grid.len();
    if echo.samples.len() != m {
        return Err(ImagingError::DimensionMismatch {
            expected: m,
            actual: echo.samples.len(),
        });
    }
    let k = config.wavenumber();
    let p = config.amplitude_exponent;
    let (kx, dk) = line_wavenumbers(theta_grid, k)?;
    let corrected: Vec<Complex64> = echo
        .samples
        .iter()
        .zip(theta_grid)
        .map(|(s, t)| {
            let c = t.cos();
            s * (k * c).powf(p) * Complex64::from_polar(1.0, 2.0 * k * z_f * c)
        })
        .collect();
    let g = idft(&corrected)?;
    let pitch = 2.0 * PI / (m as f64 * dk);
    let values = (0..m)
        .map(|i| {
            let n = centered_index(i, m);
            let x = n as f64 * pitch;
            g[wrap_index(n, m)] * Complex64::from_polar(1.0, kx[0] * x)
        })
        .collect();
    Ok(Profile {
        values,
        pitch,
        origin: -((m / 2) as f64) * pitch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{
        beamsteer_echo_1d, ideal_echo, switched_echo, LinePhaseNoise, LineReflector,
    };
    use crate::impairments::ImpairmentSpec;
    use crate::model::{build_steering_grid, uniform_theta_grid, Reflector, Scene};

    fn nominal_config() -> ImagingConfig {
        ImagingConfig::new(60e9, 32, 1.75e-3, 0.1).unwrap()
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    #[test]
    fn ideal_point_at_origin() {
        let cfg = nominal_config();
        let grid = build_steering_grid(&cfg, 64).unwrap();
        let scene = Scene::points(vec![Reflector::unit(0.0, 0.0)]).unwrap();
        let echo = ideal_echo(&scene, &grid, &cfg).unwrap();
        let img = reconstruct_beamsteer(&echo, &grid, &cfg, cfg.z0_m).unwrap();
        let (r, c, peak) = img.peak().unwrap();
        assert_eq!((img.x(c), img.y(r)), (0.0, 0.0));
        let med = median(img.magnitude().iter().copied().collect());
        assert!(peak >= 10.0 * med);
        let expected_pitch = 2.0 * PI / (64.0 * grid.delta_k);
        assert_eq!(img.pitch, (expected_pitch, expected_pitch));
    }

    #[test]
    fn ideal_point_shifted() {
        let cfg = nominal_config();
        let grid = build_steering_grid(&cfg, 64).unwrap();
        let (x0, y0) = (10e-3, -5e-3);
        let scene = Scene::points(vec![Reflector::unit(x0, y0)]).unwrap();
        let echo = ideal_echo(&scene, &grid, &cfg).unwrap();
        let img = reconstruct_beamsteer(&echo, &grid, &cfg, cfg.z0_m).unwrap();
        let (r, c, _) = img.peak().unwrap();
        assert!((img.x(c) - x0).abs() <= img.pitch.0);
        assert!((img.y(r) - y0).abs() <= img.pitch.1);
    }

    #[test]
    fn zero_echo_zero_image() {
        let cfg = nominal_config();
        let grid = build_steering_grid(&cfg, 16).unwrap();
        let echo = EchoData {
            kind: EchoKind::Beamsteered2d,
            samples: Array2::zeros((16, 16)),
        };
        let img = reconstruct_beamsteer(&echo, &grid, &cfg, cfg.z0_m).unwrap();
        assert!(img.pixels.iter().all(|v| v.norm() == 0.0));
        let wrong = build_steering_grid(&cfg, 8).unwrap();
        assert!(reconstruct_beamsteer(&echo, &wrong, &cfg, cfg.z0_m).is_err());
    }

    #[test]
    fn impulse_response_values() {
        let cfg = ImagingConfig::new(60e9, 3, 1e-3, 0.1).unwrap();
        let h = impulse_response(&cfg, 0.1);
        let k = cfg.wavenumber();
        assert!((h[[1, 1]] - Complex64::from_polar(1.0, -2.0 * k * 0.1)).norm() < 1e-12);
        assert!((h[[0, 0]] - h[[2, 2]]).norm() < 1e-12);
        assert!((h[[0, 2]] - h[[2, 0]]).norm() < 1e-12);

        let cfg = nominal_config();
        let h = impulse_response(&cfg, 0.1);
        let d = (2.0 * 27.125e-3f64.powi(2) + 0.01).sqrt();
        let expected = Complex64::from_polar(1.0, -2.0 * cfg.wavenumber() * d);
        assert!((h[[31, 31]] - expected).norm() < 1e-12);
    }

    #[test]
    fn matched_filter_identity() {
        let cfg = ImagingConfig::new(60e9, 8, 1.75e-3, 0.1).unwrap();
        let echo = EchoData {
            kind: EchoKind::Switched2d,
            samples: impulse_response(&cfg, cfg.z0_m),
        };
        let img = reconstruct_switched_mf(&echo, &cfg, cfg.z0_m).unwrap();
        let (r, c, peak) = img.peak().unwrap();
        assert_eq!((img.x(c), img.y(r)), (0.0, 0.0));
        let v = img.pixels[[r, c]];
        assert!((v - Complex64::new(64.0, 0.0)).norm() < 1e-9, "{v}");
        assert!((peak - 64.0).abs() < 1e-9);
    }

    #[test]
    fn switched_methods_agree_on_point_location() {
        let cfg = nominal_config();
        for &(x0, y0) in &[(0.0, 0.0), (7.0e-3, -3.5e-3)] {
            let scene = Scene::points(vec![Reflector::unit(x0, y0)]).unwrap();
            let echo = switched_echo(&scene, &cfg, &ImpairmentSpec::none()).unwrap();
            let mf = reconstruct_switched_mf(&echo, &cfg, cfg.z0_m).unwrap();
            let sp = reconstruct_switched_spectral(&echo, &cfg, cfg.z0_m).unwrap();
            let (r1, c1, _) = mf.peak().unwrap();
            let (r2, c2, _) = sp.peak().unwrap();
            assert!((mf.x(c1) - x0).abs() <= mf.pitch.0);
            assert!((mf.y(r1) - y0).abs() <= mf.pitch.1);
            assert_eq!((r1, c1), (r2, c2));
        }
    }

    #[test]
    fn spectral_zeroes_outside_visible_region() {
        // spacing well above half a wavelength puts some bins outside 2k
        let cfg = ImagingConfig::new(60e9, 8, 4e-3, 0.1).unwrap();
        let flat = EchoData {
            kind: EchoKind::Switched2d,
            samples: Array2::from_elem((8, 8), Complex64::new(1.0, 0.0)),
        };
        let img = reconstruct_switched_spectral(&flat, &cfg, cfg.z0_m).unwrap();
        assert!(img.pixels.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn line_profile_centred_point() {
        let cfg = ImagingConfig::new(60e9, 64, 40e-3 / 64.0, 0.1).unwrap();
        let k = cfg.wavenumber();
        let thetas = uniform_theta_grid(k, 0.4, 128);
        let target = [LineReflector {
            x: 0.0,
            amplitude: Complex64::new(1.0, 0.0),
        }];
        let echo = beamsteer_echo_1d(&target, &thetas, &cfg, &LinePhaseNoise::off()).unwrap();
        let prof = reconstruct_1d(&echo, &thetas, &cfg, cfg.z0_m).unwrap();
        let mag = prof.magnitude();
        let (imax, _) = mag
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(prof.x(imax), 0.0);
        for d in 1..20 {
            let (l, r) = (mag[imax - d], mag[imax + d]);
            assert!((l - r).abs() <= 0.01 * mag[imax], "asymmetry at {d}");
        }
    }

    #[test]
    fn line_profile_off_axis_target() {
        let cfg = ImagingConfig::new(60e9, 16, 2.5e-3, 0.1).unwrap();
        let k = cfg.wavenumber();
        let thetas = uniform_theta_grid(k, 0.75, 128);
        let target = [LineReflector {
            x: 0.05,
            amplitude: Complex64::new(1.0, 0.0),
        }];
        let echo = beamsteer_echo_1d(&target, &thetas, &cfg, &LinePhaseNoise::off()).unwrap();
        let prof = reconstruct_1d(&echo, &thetas, &cfg, cfg.z0_m).unwrap();
        let mag = prof.magnitude();
        let (imax, _) = mag
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert!((prof.x(imax) - 0.05).abs() <= prof.pitch, "{}", prof.x(imax));
    }

    #[test]
    fn line_rejects_nonuniform_grid() {
        let cfg = ImagingConfig::new(60e9, 16, 2.5e-3, 0.1).unwrap();
        let thetas = vec![0.0, 0.1, 0.3];
        let echo = EchoData {
            kind: EchoKind::Beamsteered1d,
            samples: Array2::zeros((1, 3)),
        };
        assert!(matches!(
            reconstruct_1d(&echo, &thetas, &cfg, 0.1),
            Err(ImagingError::NonUniformGrid { .. })
        ));
        let k = cfg.wavenumber();
        let ok = uniform_theta_grid(k, 0.3, 3);
        let prof = reconstruct_1d(&echo, &ok, &cfg, 0.1).unwrap();
        assert!(prof.values.iter().all(|v| v.norm() == 0.0));
    }
}
