//! Quantitative studies: PSF under phase noise, sidelobe suppression level,
//! breakpoint estimation, resolution formulas, array gain and image metrics.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{ImagingError, Result};
use crate::forward::{
    beamsteer_echo, beamsteer_echo_1d, switched_echo, EchoData, LinePhaseNoise, LineReflector,
};
use crate::impairments::ImpairmentSpec;
use crate::model::{uniform_theta_grid, ImagingConfig, Reflector, Scene, SteeringGrid};
use crate::reconstruction::{reconstruct_1d, Image};

/// Linear-array phase-noise study at constant aperture: element spacing is
/// `aperture_m / n_antennas` for every array size.
#[derive(Debug, Clone, PartialEq)]
pub struct PsfStudy {
    pub frequency_hz: f64,
    pub aperture_m: f64,
    pub z0_m: f64,
    /// Half-width of the look-angle sweep.
    pub theta_limit_rad: f64,
    pub looks: usize,
    pub independent_tx_rx: bool,
}

impl Default for PsfStudy {
    fn default() -> Self {
        Self {
            frequency_hz: 60e9,
            aperture_m: 40e-3,
            z0_m: 0.1,
            theta_limit_rad: 0.9,
            looks: 128,
            independent_tx_rx: true,
        }
    }
}

impl PsfStudy {
    pub fn config(&self, n_antennas: usize) -> Result<ImagingConfig> {
        if n_antennas == 0 {
            return Err(ImagingError::InvalidConfig("n_antennas must be at least 1".into()));
        }
        ImagingConfig::new(
            self.frequency_hz,
            n_antennas,
            self.aperture_m / n_antennas as f64,
            self.z0_m,
        )?
        .with_theta_limit(self.theta_limit_rad)
    }

    pub fn theta_grid(&self) -> Result<Vec<f64>> {
        if self.looks < 2 {
            return Err(ImagingError::InvalidConfig("looks must be at least 2".into()));
        }
        let k = crate::model::wavenumber(self.frequency_hz)?;
        Ok(uniform_theta_grid(k, self.theta_limit_rad, self.looks))
    }
}

/// Expected PSF: mean over `trials` of the reconstructed magnitude of a unit
/// point at the origin. Trial `t` always uses the same draws regardless of
/// `trials` or thread count.
pub fn psf_1d(
    config: &ImagingConfig,
    theta_grid: &[f64],
    sigma_phi: f64,
    trials: usize,
    seed: u64,
    independent_tx_rx: bool,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(ImagingError::InvalidConfig("trials must be at least 1".into()));
    }
    let target = [LineReflector {
        x: 0.0,
        amplitude: Complex64::new(1.0, 0.0),
    }];
    let z_f = config.focus();
    let profiles: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let noise = LinePhaseNoise {
                sigma_phi,
                seed,
                trial,
                independent_tx_rx,
            };
            let echo = beamsteer_echo_1d(&target, theta_grid, config, &noise)?;
            Ok(reconstruct_1d(&echo, theta_grid, config, z_f)?.magnitude())
        })
        .collect::<Result<_>>()?;
    let mut mean = vec![0.0; theta_grid.len()];
    for p in &profiles {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    let scale = 1.0 / trials as f64;
    mean.iter_mut().for_each(|m| *m *= scale);
    Ok(mean)
}

/// Sidelobe suppression level in dB: largest local maximum outside the
/// mainlobe relative to the global maximum. The mainlobe runs from the peak
/// to the first sample on each side that is not strictly lower than its
/// predecessor. Returns `-inf` when nothing lies outside the mainlobe.
pub fn ssl(profile: &[f64]) -> Result<f64> {
    let n = profile.len();
    if n == 0 {
        return Err(ImagingError::Empty("profile"));
    }
    let mut g = 0;
    for i in 1..n {
        if profile[i] > profile[g] {
            g = i;
        }
    }
    let peak = profile[g];
    if !(peak > 0.0) || profile.iter().enumerate().any(|(i, &v)| i != g && v == peak) {
        return Err(ImagingError::NoStrictPeak);
    }
    let mut hi = g;
    while hi + 1 < n && profile[hi + 1] < profile[hi] {
        hi += 1;
    }
    let mut lo = g;
    while lo > 0 && profile[lo - 1] < profile[lo] {
        lo -= 1;
    }
    let is_local_max = |i: usize| {
        (i == 0 || profile[i] >= profile[i - 1]) && (i + 1 == n || profile[i] >= profile[i + 1])
    };
    let side = (0..lo)
        .chain(hi + 1..n)
        .filter(|&i| is_local_max(i))
        .map(|i| profile[i])
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(match side {
        Some(s) => 20.0 * (s / peak).log10(),
        None => f64::NEG_INFINITY,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SslCurve {
    pub sigma_values: Vec<f64>,
    pub ssl_db: Vec<f64>,
    pub n_antennas: usize,
    pub trials: usize,
    pub seed: u64,
}

/// SSL of the expected PSF at each phase-noise level.
pub fn ssl_sweep(
    study: &PsfStudy,
    n_antennas: usize,
    sigma_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SslCurve> {
    if sigma_values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ImagingError::InvalidConfig(
            "sigma values must be strictly increasing".into(),
        ));
    }
    let config = study.config(n_antennas)?;
    let thetas = study.theta_grid()?;
    let ssl_db = sigma_values
        .iter()
        .map(|&s| ssl(&psf_1d(&config, &thetas, s, trials, seed, study.independent_tx_rx)?))
        .collect::<Result<_>>()?;
    Ok(SslCurve {
        sigma_values: sigma_values.to_vec(),
        ssl_db,
        n_antennas,
        trials,
        seed,
    })
}

/// Evenly spaced values `start, start + step, ...` up to `stop` inclusive.
pub fn sigma_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).collect()
}

/// Fitting window and threshold for [`breakpoint_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakpointParams {
    pub window_low_db: f64,
    pub window_high_db: f64,
    pub threshold_db: f64,
}

impl Default for BreakpointParams {
    fn default() -> Self {
        Self {
            window_low_db: -10.0,
            window_high_db: -2.0,
            threshold_db: -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakpointReport {
    pub sigma_sb: f64,
    pub sigma_tb: f64,
    pub fit_slope: f64,
    pub fit_intercept: f64,
    pub floor_db: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Fits a line to the SSL samples inside the window; the sidelobe breakpoint
/// is where it meets the noise-free level (first curve entry) and the upper
/// threshold is where it reaches `threshold_db`.
pub fn breakpoint_fit(curve: &SslCurve, params: &BreakpointParams) -> Result<BreakpointReport> {
    if curve.sigma_values.len() != curve.ssl_db.len() {
        return Err(ImagingError::DimensionMismatch {
            expected: curve.sigma_values.len(),
            actual: curve.ssl_db.len(),
        });
    }
    let floor_db = *curve.ssl_db.first().ok_or(ImagingError::Empty("SSL curve"))?;
    if !floor_db.is_finite() {
        return Err(ImagingError::FitFailure("noise-free SSL is not finite".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .sigma_values
        .iter()
        .zip(&curve.ssl_db)
        .filter(|(_, &s)| s >= params.window_low_db && s <= params.window_high_db)
        .map(|(&x, &y)| (x, y))
        .unzip();
    if xs.len() < 3 {
        return Err(ImagingError::FitFailure(format!(
            "{} samples inside the fitting window, need 3",
            xs.len()
        )));
    }
    let (m, c) = least_squares(&xs, &ys)
        .ok_or_else(|| ImagingError::FitFailure("degenerate sigma values".into()))?;
    if !(m > 0.0) {
        return Err(ImagingError::FitFailure(format!("non-increasing fit, slope {m}")));
    }
    Ok(BreakpointReport {
        sigma_sb: (floor_db - c) / m,
        sigma_tb: (params.threshold_db - c) / m,
        fit_slope: m,
        fit_intercept: c,
        floor_db,
    })
}

/// Least-squares `sigma = slope * log10(n) + intercept`.
pub fn breakpoint_model_fit(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).log10()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, s)| s).collect();
    if points.iter().any(|&(n, _)| n == 0) || xs.len() < 2 {
        return Err(ImagingError::FitFailure("need two or more positive array sizes".into()));
    }
    least_squares(&xs, &ys)
        .ok_or_else(|| ImagingError::FitFailure("array sizes must not all be equal".into()))
}

/// Cross-range resolution of the beam-steered system for a target at `(x, y)`.
pub fn resolution_beamsteer(x: f64, y: f64, config: &ImagingConfig) -> Result<f64> {
    config.validate()?;
    let rho = x.hypot(y);
    let theta = rho.atan2(config.z0_m);
    if theta >= config.theta_limit_rad {
        return Err(ImagingError::BeyondSteeringLimit {
            theta,
            limit: config.theta_limit_rad,
        });
    }
    let range = (rho * rho + config.z0_m * config.z0_m).sqrt();
    let span = (config.n_antennas as f64 - 1.0) * config.spacing_m;
    Ok(config.wavelength() / 2.0 * range / span / theta.cos().abs())
}

/// Switched-array cross-range resolution `(lambda/2) z0 / ((N-1) spacing)`.
pub fn resolution_switched(config: &ImagingConfig) -> f64 {
    let span = (config.n_antennas as f64 - 1.0) * config.spacing_m;
    config.wavelength() / 2.0 * config.z0_m / span
}

/// Transmit plus receive array gain of an `n x n` array in dB.
pub fn array_gain_db(n_antennas: usize) -> f64 {
    2.0 * 10.0 * ((n_antennas * n_antennas) as f64).log10()
}

/// Per-sample SNR advantage (dB) of the beam-steered system over the
/// switched one for a unit point at the origin, both at `snr_db` per
/// element. The beam-steered side uses the strongest look; noise power is
/// measured from the noisy minus noiseless echoes.
pub fn measured_processing_gain_db(
    config: &ImagingConfig,
    grid: &SteeringGrid,
    snr_db: f64,
    seed: u64,
) -> Result<f64> {
    let scene = Scene::points(vec![Reflector::unit(0.0, 0.0)])?;
    let clean = ImpairmentSpec::none();
    let noisy = ImpairmentSpec {
        snr_db: Some(snr_db),
        seed,
        ..ImpairmentSpec::none()
    };
    let noise_power = |a: &EchoData, b: &EchoData, mask: Option<&Array2<bool>>| {
        let mut acc = 0.0;
        let mut count = 0usize;
        for ((idx, x), y) in a.samples.indexed_iter().zip(b.samples.iter()) {
            if mask.is_none_or(|m| m[idx]) {
                acc += (x - y).norm_sqr();
                count += 1;
            }
        }
        acc / count as f64
    };

    let b0 = beamsteer_echo(&scene, grid, config, &clean)?;
    let b1 = beamsteer_echo(&scene, grid, config, &noisy)?;
    let peak = b0.samples.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let snr_b = peak / noise_power(&b1, &b0, Some(&grid.mask));

    let s0 = switched_echo(&scene, config, &clean)?;
    let s1 = switched_echo(&scene, config, &noisy)?;
    let signal = s0.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / s0.samples.len() as f64;
    let snr_s = signal / noise_power(&s1, &s0, None);
    Ok(10.0 * (snr_b / snr_s).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageMetrics {
    /// Distance from the brightest pixel to the nearest true reflector (m).
    pub peak_offset: f64,
    pub normalized_rmse: f64,
    pub peak_to_background_db: f64,
}

/// Radius (pixels) by which the truth support is grown before measuring the
/// background.
pub const BACKGROUND_DILATION: usize = 2;

/// Truth reflectivity accumulated onto the image grid.
pub fn rasterize_truth(truth: &Scene, like: &Image) -> Result<Array2<Complex64>> {
    let (rows, cols) = like.pixels.dim();
    let mut out = Array2::zeros((rows, cols));
    for r in truth.reflectors() {
        let fc = (r.x - like.origin.0) / like.pitch.0;
        let fr = (r.y - like.origin.1) / like.pitch.1;
        let inside = |f: f64, n: usize| f >= -0.5 && f < n as f64 - 0.5;
        if !inside(fc, cols) || !inside(fr, rows) {
            return Err(ImagingError::InvalidConfig(format!(
                "reflector at ({}, {}) lies outside the image",
                r.x, r.y
            )));
        }
        out[[fr.round() as usize, fc.round() as usize]] += r.amplitude;
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Peak location error, peak-normalized RMSE and peak-to-background ratio
/// of `recon` against the true scene.
pub fn image_error(recon: &Image, truth: &Scene) -> Result<ImageMetrics> {
    let reflectors: Vec<Reflector> = truth.reflectors();
    if reflectors.is_empty() {
        return Err(ImagingError::Empty("truth scene"));
    }
    let (pr, pc, peak) = recon.peak().ok_or(ImagingError::NoStrictPeak)?;
    let (px, py) = (recon.x(pc), recon.y(pr));
    let peak_offset = reflectors
        .iter()
        .map(|r| (r.x - px).hypot(r.y - py))
        .fold(f64::INFINITY, f64::min);

    let truth_map = rasterize_truth(truth, recon)?.mapv(|v| v.norm());
    let truth_peak = truth_map.iter().copied().fold(0.0, f64::max);
    let mag = recon.magnitude();
    let sq: f64 = mag
        .iter()
        .zip(truth_map.iter())
        .map(|(a, b)| {
            let t = if truth_peak > 0.0 { b / truth_peak } else { 0.0 };
            (a / peak - t).powi(2)
        })
        .sum();
    let normalized_rmse = (sq / mag.len() as f64).sqrt();

    let (rows, cols) = mag.dim();
    let d = BACKGROUND_DILATION;
    let mut support = Array2::from_elem((rows, cols), false);
    for ((r, c), &v) in truth_map.indexed_iter() {
        if v > 0.0 {
            for rr in r.saturating_sub(d)..=(r + d).min(rows - 1) {
                for cc in c.saturating_sub(d)..=(c + d).min(cols - 1) {
                    support[[rr, cc]] = true;
                }
            }
        }
    }
    let mut background: Vec<f64> = mag
        .iter()
        .zip(support.iter())
        .filter(|(_, &s)| !s)
        .map(|(&m, _)| m)
        .collect();
    if background.is_empty() {
        return Err(ImagingError::Empty("image background"));
    }
    let bg = median(&mut background);
    Ok(ImageMetrics {
        peak_offset,
        normalized_rmse,
        peak_to_background_db: 20.0 * (peak / bg).log10(),
    })
}

/// Local maxima of a sampled curve refined by three-point parabolic
/// interpolation, as `(fractional index, value)`, strongest first.
pub fn refined_peaks(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    let mut peaks: Vec<(f64, f64)> = (1..n.saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .map(|i| {
            let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                let off = 0.5 * (a - c) / denom;
                (i as f64 + off, b - 0.25 * (a - c) * off)
            } else {
                (i as f64, b)
            }
        })
        .collect();
    peaks.sort_by(|x, y| y.1.total_cmp(&x.1));
    peaks
}

/// Depth in dB of the valley between the two strongest local maxima,
/// relative to the weaker of the two; `None` with fewer than two maxima.
pub fn two_peak_dip_db(values: &[f64]) -> Option<f64> {
    let peaks = refined_peaks(values);
    if peaks.len() < 2 {
        return None;
    }
    let (a, b) = (peaks[0].0.round() as usize, peaks[1].0.round() as usize);
    let (lo, hi) = (a.min(b), a.max(b));
    let valley = values[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
    let weaker = values[a].min(values[b]);
    Some(20.0 * (weaker / valley).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn nominal_config() -> ImagingConfig {
        ImagingConfig::new(60e9, 32, 1.75e-3, 0.1).unwrap()
    }

    #[test]
    fn ssl_examples() {
        let v = ssl(&[0.0, 1.0, 0.0, 0.5, 0.0]).unwrap();
        assert_relative_eq!(v, 20.0 * 0.5f64.log10(), epsilon = 1e-12);
        assert!((v + 6.0206).abs() < 1e-3);
        assert_eq!(ssl(&[0.1, 0.5, 1.0, 0.6, 0.2]).unwrap(), f64::NEG_INFINITY);
        // edge samples count as local maxima
        assert_relative_eq!(ssl(&[1.0, 0.5, 0.7]).unwrap(), 20.0 * 0.7f64.log10());
        assert!(matches!(ssl(&[1.0, 1.0, 0.0]), Err(ImagingError::NoStrictPeak)));
        assert!(matches!(ssl(&[0.0, 0.0]), Err(ImagingError::NoStrictPeak)));
    }

    #[test]
    fn ssl_plateau_next_to_mainlobe() {
        // the flat run after the first minimum is outside the mainlobe
        let v = ssl(&[0.2, 0.2, 1.0, 0.3, 0.3, 0.1]).unwrap();
        assert_relative_eq!(v, 20.0 * 0.3f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn noiseless_psf_is_symmetric_with_sidelobes() {
        let study = PsfStudy::default();
        let cfg = study.config(64).unwrap();
        let thetas = study.theta_grid().unwrap();
        let p = psf_1d(&cfg, &thetas, 0.0, 1, 0, true).unwrap();
        let m = p.len();
        let (imax, _) = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(imax, m / 2);
        for d in 1..m / 2 {
            assert!((p[imax - d] - p[imax + d]).abs() <= 0.01 * p[imax]);
        }
        assert!(ssl(&p).unwrap() < -10.0);
    }

    #[test]
    fn trials_use_fresh_draws() {
        let study = PsfStudy::default();
        let cfg = study.config(16).unwrap();
        let thetas = study.theta_grid().unwrap();
        let one = psf_1d(&cfg, &thetas, 0.5, 1, 3, true).unwrap();
        let two = psf_1d(&cfg, &thetas, 0.5, 2, 3, true).unwrap();
        assert_ne!(one, two);
        assert_eq!(one, psf_1d(&cfg, &thetas, 0.5, 1, 3, true).unwrap());
        assert!(psf_1d(&cfg, &thetas, 0.5, 0, 3, true).is_err());
    }

    fn synthetic_curve(floor: f64, slope: f64, intercept: f64) -> SslCurve {
        let sigma_values = sigma_range(0.0, 5.0, 0.1);
        let ssl_db = sigma_values
            .iter()
            .map(|&s| (slope * s + intercept).clamp(floor, 0.0))
            .collect();
        SslCurve {
            sigma_values,
            ssl_db,
            n_antennas: 16,
            trials: 1,
            seed: 0,
        }
    }

    #[test]
    fn breakpoint_line_arithmetic() {
        // line 8 sigma - 32 meets the -20 floor at 1.5 and -1 dB at 3.875
        let curve = synthetic_curve(-20.0, 8.0, -32.0);
        let r = breakpoint_fit(&curve, &BreakpointParams::default()).unwrap();
        assert_relative_eq!(r.fit_slope, 8.0, epsilon = 1e-9);
        assert_relative_eq!(r.fit_intercept, -32.0, epsilon = 1e-9);
        assert_relative_eq!(r.sigma_sb, 1.5, epsilon = 1e-9);
        assert_relative_eq!(r.sigma_tb, 3.875, epsilon = 1e-9);
        assert_eq!(r.floor_db, -20.0);
    }

    #[test]
    fn breakpoint_failures() {
        let flat = synthetic_curve(-20.0, 0.0, -20.0);
        assert!(matches!(
            breakpoint_fit(&flat, &BreakpointParams::default()),
            Err(ImagingError::FitFailure(_))
        ));
        let mut falling = synthetic_curve(-20.0, 8.0, -32.0);
        falling.ssl_db.reverse();
        falling.ssl_db[0] = -20.0;
        assert!(breakpoint_fit(&falling, &BreakpointParams::default()).is_err());
    }

    #[test]
    fn model_fit_cases() {
        let (s, c) = breakpoint_model_fit(&[(10, 1.0), (100, 2.0)]).unwrap();
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c, 0.0, epsilon = 1e-12);
        let pts: Vec<(usize, f64)> = [16usize, 64, 128]
            .iter()
            .map(|&n| (n, 0.7516 * (n as f64).log10() - 0.1152))
            .collect();
        let (s, c) = breakpoint_model_fit(&pts).unwrap();
        assert_relative_eq!(s, 0.7516, epsilon = 1e-12);
        assert_relative_eq!(c, -0.1152, epsilon = 1e-12);
        assert!(breakpoint_model_fit(&[(16, 1.0), (16, 2.0)]).is_err());
        assert!(breakpoint_model_fit(&[(16, 1.0)]).is_err());
    }

    #[test]
    fn resolution_values() {
        let cfg = nominal_config();
        let lambda = 299_792_458.0 / 60e9;
        let expected = lambda / 2.0 * 0.1 / (31.0 * 1.75e-3);
        assert_relative_eq!(resolution_switched(&cfg), expected, epsilon = 1e-15);
        assert!((resolution_switched(&cfg) - 4.605e-3).abs() < 1e-6);
        assert_eq!(resolution_beamsteer(0.0, 0.0, &cfg).unwrap(), resolution_switched(&cfg));
        let near = resolution_beamsteer(0.01, 0.0, &cfg).unwrap();
        let far = resolution_beamsteer(0.02, 0.0, &cfg).unwrap();
        assert!(far > near && near > resolution_switched(&cfg));
        let mut wide = cfg.clone();
        wide.spacing_m *= 2.0;
        assert_relative_eq!(resolution_switched(&wide), expected / 2.0, epsilon = 1e-15);
        let distant = ImagingConfig::new(60e9, 32, 1.75e-3, 1e4).unwrap();
        let r = resolution_beamsteer(0.01, 0.01, &distant).unwrap();
        assert_relative_eq!(r, resolution_switched(&distant), max_relative = 1e-9);
        let narrow = cfg.with_theta_limit(0.05).unwrap();
        assert!(resolution_beamsteer(0.02, 0.0, &narrow).is_err());
    }

    #[test]
    fn array_gain_values() {
        assert!((array_gain_db(32) - 60.206).abs() < 1e-3);
        assert_eq!(array_gain_db(1), 0.0);
        assert!((array_gain_db(8) - 40.0 * 8f64.log10()).abs() < 1e-12);
    }

    fn image(pixels: Array2<Complex64>) -> Image {
        Image {
            pixels,
            pitch: (1.0, 1.0),
            origin: (0.0, 0.0),
            provenance: crate::reconstruction::Provenance::Raster,
        }
    }

    #[test]
    fn image_error_identity_and_background() {
        let truth = Scene::points(vec![Reflector::unit(5.0, 4.0)]).unwrap();
        let mut px = Array2::zeros((12, 12));
        px[[4, 5]] = Complex64::new(1.0, 0.0);
        let m = image_error(&image(px.clone()), &truth).unwrap();
        assert_eq!(m.peak_offset, 0.0);
        assert_eq!(m.normalized_rmse, 0.0);
        assert_eq!(m.peak_to_background_db, f64::INFINITY);

        let eps = 1e-3;
        for ((r, c), v) in px.indexed_iter_mut() {
            if (r, c) != (4, 5) {
                *v = Complex64::new(0.0, eps);
            }
        }
        let m = image_error(&image(px), &truth).unwrap();
        assert_relative_eq!(m.peak_to_background_db, 60.0, epsilon = 1e-9);

        let zero = image(Array2::zeros((12, 12)));
        assert!(matches!(image_error(&zero, &truth), Err(ImagingError::NoStrictPeak)));
        let outside = Scene::points(vec![Reflector::unit(40.0, 0.0)]).unwrap();
        let one = image(array![[Complex64::new(1.0, 0.0)]]);
        assert!(image_error(&one, &outside).is_err());
    }

    #[test]
    fn peak_helpers() {
        let v = [0.0, 1.0, 0.2, 1.0, 0.0];
        assert_relative_eq!(two_peak_dip_db(&v).unwrap(), 20.0 * 5f64.log10(), epsilon = 1e-12);
        assert_eq!(two_peak_dip_db(&[0.0, 1.0, 0.5, 0.0]), None);
        // symmetric samples of a parabola refine to the vertex
        let q: Vec<f64> = (0..5).map(|i| 4.0 - (i as f64 - 2.3).powi(2)).collect();
        let p = refined_peaks(&q);
        assert_relative_eq!(p[0].0, 2.3, epsilon = 1e-12);
        assert_relative_eq!(p[0].1, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn sigma_range_inclusive() {
        let s = sigma_range(0.0, 5.0, 0.1);
        assert_eq!(s.len(), 51);
        assert_relative_eq!(*s.last().unwrap(), 5.0, epsilon = 1e-12);
        assert!(sigma_range(1.0, 0.0, 0.1).is_empty());
    }
}
