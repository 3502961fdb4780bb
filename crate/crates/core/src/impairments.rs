//! RF non-idealities: receiver AWGN, finite-resolution phase shifters and
//! timing-jitter phase noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ImagingError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ImpairmentSpec {
    /// Per-element SNR in dB; `None` disables receiver noise.
    pub snr_db: Option<f64>,
    /// Phase-shifter resolution; `None` is an ideal (continuous) shifter.
    pub phase_bits: Option<u32>,
    /// Phase-noise standard deviation (rad).
    pub sigma_phi: f64,
    /// Timing jitter (s); converted to phase noise at the carrier.
    pub jitter_s: f64,
    pub seed: u64,
    /// Draw transmit and receive phase noise independently at each element.
    /// When false the receive chain reuses the transmit draw.
    pub independent_tx_rx: bool,
}

impl Default for ImpairmentSpec {
    fn default() -> Self {
        Self {
            snr_db: None,
            phase_bits: None,
            sigma_phi: 0.0,
            jitter_s: 0.0,
            seed: 0,
            independent_tx_rx: true,
        }
    }
}

impl ImpairmentSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(ImagingError::InvalidConfig(msg.to_string()));
        if !(self.sigma_phi >= 0.0 && self.sigma_phi.is_finite()) {
            return bad("sigma_phi must be a finite non-negative angle");
        }
        if !(self.jitter_s >= 0.0 && self.jitter_s.is_finite()) {
            return bad("jitter must be a finite non-negative time");
        }
        if self.sigma_phi > 0.0 && self.jitter_s > 0.0 {
            return bad("set at most one of sigma_phi and jitter");
        }
        if self.phase_bits == Some(0) {
            return bad("phase_bits must be at least 1");
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return bad("snr_db must be a number");
            }
        }
        Ok(())
    }

    /// Phase-noise standard deviation at carrier `frequency_hz`.
    pub fn phase_sigma(&self, frequency_hz: f64) -> f64 {
        if self.jitter_s > 0.0 {
            jitter_to_sigma(frequency_hz, self.jitter_s)
        } else {
            self.sigma_phi
        }
    }

    pub fn has_receiver_noise(&self) -> bool {
        matches!(self.snr_db, Some(s) if s.is_finite())
    }
}

/// Rounds a phase to the nearest of `2^bits` levels `2*pi*m / 2^bits`; ties
/// go to the lower level.
pub fn quantize_angle(phase: f64, bits: u32) -> f64 {
    let step = 2.0 * PI / (1u64 << bits) as f64;
    (phase / step - 0.5).ceil() * step
}

/// Quantizes the phase of a unit-modulus weight.
pub fn quantize_phase(weight: Complex64, bits: u32) -> Complex64 {
    Complex64::from_polar(1.0, quantize_angle(weight.arg(), bits))
}

/// Multiplies the weight by `exp(-j psi)` with `psi ~ N(0, sigma^2)`.
pub fn perturb_weight<R: Rng + ?Sized>(weight: Complex64, sigma_phi: f64, rng: &mut R) -> Complex64 {
    if sigma_phi == 0.0 {
        return weight;
    }
    let psi: f64 = sigma_phi * rng.sample::<f64, _>(StandardNormal);
    weight * Complex64::from_polar(1.0, -psi)
}

/// Phase-noise standard deviation produced by timing jitter at the carrier.
pub fn jitter_to_sigma(frequency_hz: f64, jitter_s: f64) -> f64 {
    2.0 * PI * frequency_hz * jitter_s
}

/// Per-sample complex noise variance for a given reference power and SNR.
pub fn noise_variance(signal_power_ref: f64, snr_db: f64) -> f64 {
    signal_power_ref / 10f64.powf(snr_db / 10.0)
}

/// One circularly-symmetric complex Gaussian sample of total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Adds AWGN at `snr_db` relative to `signal_power_ref`. `None` or `+inf`
/// leaves the samples untouched.
pub fn add_awgn<R: Rng + ?Sized>(
    samples: &[Complex64],
    snr_db: Option<f64>,
    signal_power_ref: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let Some(snr) = snr_db.filter(|s| s.is_finite()) else {
        return Ok(samples.to_vec());
    };
    if !(signal_power_ref > 0.0) {
        return Err(ImagingError::InvalidConfig(format!(
            "signal power reference must be positive, got {signal_power_ref}"
        )));
    }
    let var = noise_variance(signal_power_ref, snr);
    Ok(samples
        .iter()
        .map(|&s| s + complex_gaussian(var, rng))
        .collect())
}

/// Steering-weight distortion for one look: quantize first, then perturb.
#[derive(Debug, Clone, Copy)]
pub struct WeightDistortion {
    pub bits: Option<u32>,
    pub sigma: f64,
}

impl WeightDistortion {
    pub fn from_spec(spec: &ImpairmentSpec, frequency_hz: f64) -> Self {
        Self {
            bits: spec.phase_bits,
            sigma: spec.phase_sigma(frequency_hz),
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.bits.is_none() && self.sigma == 0.0
    }

    /// Distorted weight for an ideal phase and a standard-normal draw `z`.
    #[inline]
    pub fn weight(&self, phase: f64, z: f64) -> Complex64 {
        let q = match self.bits {
            Some(b) => quantize_angle(wrap_phase(phase), b),
            None => phase,
        };
        Complex64::from_polar(1.0, q - self.sigma * z)
    }
}

/// Wraps to `(-pi, pi]`, matching `Complex64::arg`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.sin().atan2(phase.cos());
    if w == -PI {
        PI
    } else {
        w
    }
}
