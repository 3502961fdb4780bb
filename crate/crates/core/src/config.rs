//! Plain `key = value` experiment configuration.
//!
//! Units: Hz, m, dB, rad, s. `#` starts a comment. Unknown and duplicate
//! keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::analysis::PsfStudy;
use crate::error::{ImagingError, Result};
use crate::impairments::ImpairmentSpec;
use crate::model::{default_grid_size, default_theta_limit, Bounds, ImagingConfig, MAX_THETA_LIMIT};

pub const REQUIRED_KEYS: [&str; 4] = ["frequency_hz", "n_antennas", "spacing_m", "z0_m"];

const OPTIONAL_KEYS: [&str; 23] = [
    "z_focus_m",
    "theta_limit_rad",
    "amplitude_exponent",
    "tx_amplitude",
    "grid_size",
    "snr_db",
    "phase_bits",
    "sigma_phi_rad",
    "jitter_s",
    "independent_tx_rx",
    "seed",
    "scene",
    "out_dir",
    "trials",
    "sigma_max_rad",
    "sigma_step_rad",
    "sweep_antennas",
    "psf_aperture_m",
    "psf_z0_m",
    "psf_theta_limit_rad",
    "psf_looks",
    "separation_m",
    "offset_x_m",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub frequency_hz: f64,
    pub n_antennas: usize,
    pub spacing_m: f64,
    pub z0_m: f64,
    pub z_focus_m: Option<f64>,
    /// `None` derives the limit from the scene extent.
    pub theta_limit_rad: Option<f64>,
    pub amplitude_exponent: f64,
    pub tx_amplitude: f64,
    pub grid_size: Option<usize>,
    pub impairments: ImpairmentSpec,
    pub scene: Option<String>,
    pub out_dir: Option<String>,
    pub trials: usize,
    pub sigma_max_rad: f64,
    pub sigma_step_rad: f64,
    pub sweep_antennas: Vec<usize>,
    pub psf_aperture_m: f64,
    pub psf_z0_m: f64,
    pub psf_theta_limit_rad: f64,
    pub psf_looks: usize,
    pub separation_m: f64,
    pub offset_x_m: f64,
}

impl ExperimentConfig {
    /// Config with the four required values and every default applied.
    pub fn new(frequency_hz: f64, n_antennas: usize, spacing_m: f64, z0_m: f64) -> Self {
        let psf = PsfStudy::default();
        Self {
            frequency_hz,
            n_antennas,
            spacing_m,
            z0_m,
            z_focus_m: None,
            theta_limit_rad: None,
            amplitude_exponent: 1.0,
            tx_amplitude: 1.0,
            grid_size: None,
            impairments: ImpairmentSpec::none(),
            scene: None,
            out_dir: None,
            trials: 200,
            sigma_max_rad: 5.0,
            sigma_step_rad: 0.1,
            sweep_antennas: vec![16, 64, 128],
            psf_aperture_m: psf.aperture_m,
            psf_z0_m: psf.z0_m,
            psf_theta_limit_rad: psf.theta_limit_rad,
            psf_looks: psf.looks,
            separation_m: 10e-3,
            offset_x_m: 15e-3,
        }
    }

    /// Imaging geometry; the steering limit defaults to what `bounds` needs.
    pub fn imaging(&self, bounds: Option<Bounds>) -> Result<ImagingConfig> {
        let mut cfg = ImagingConfig::new(self.frequency_hz, self.n_antennas, self.spacing_m, self.z0_m)?;
        cfg.amplitude_exponent = self.amplitude_exponent;
        cfg.tx_amplitude = self.tx_amplitude;
        cfg.z_focus_m = self.z_focus_m;
        cfg.theta_limit_rad = match self.theta_limit_rad {
            Some(t) => t,
            None => default_theta_limit(&cfg, bounds),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size.unwrap_or_else(|| default_grid_size(self.n_antennas))
    }

    pub fn psf_study(&self) -> PsfStudy {
        PsfStudy {
            frequency_hz: self.frequency_hz,
            aperture_m: self.psf_aperture_m,
            z0_m: self.psf_z0_m,
            theta_limit_rad: self.psf_theta_limit_rad,
            looks: self.psf_looks,
            independent_tx_rx: self.impairments.independent_tx_rx,
        }
    }

    pub fn seed(&self) -> u64 {
        self.impairments.seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.impairments.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| check(key, v.is_finite() && v > 0.0, "must be positive");
        positive("frequency_hz", self.frequency_hz)?;
        check("n_antennas", self.n_antennas >= 1, "must be at least 1")?;
        positive("spacing_m", self.spacing_m)?;
        positive("z0_m", self.z0_m)?;
        if let Some(z) = self.z_focus_m {
            positive("z_focus_m", z)?;
        }
        if let Some(t) = self.theta_limit_rad {
            check(
                "theta_limit_rad",
                t > 0.0 && t <= MAX_THETA_LIMIT,
                "must lie in (0, 85 deg]",
            )?;
        }
        check(
            "amplitude_exponent",
            self.amplitude_exponent.is_finite(),
            "must be finite",
        )?;
        positive("tx_amplitude", self.tx_amplitude)?;
        if let Some(g) = self.grid_size {
            check("grid_size", g >= 2, "must be at least 2")?;
        }
        let imp = &self.impairments;
        if let Some(s) = imp.snr_db {
            check("snr_db", !s.is_nan(), "must be a number or `off`")?;
        }
        if let Some(b) = imp.phase_bits {
            check("phase_bits", (1..=52).contains(&b), "must be 1..=52 or `infinite`")?;
        }
        check(
            "sigma_phi_rad",
            imp.sigma_phi.is_finite() && imp.sigma_phi >= 0.0,
            "must be non-negative",
        )?;
        check(
            "jitter_s",
            imp.jitter_s.is_finite() && imp.jitter_s >= 0.0,
            "must be non-negative",
        )?;
        check(
            "jitter_s",
            imp.jitter_s == 0.0 || imp.sigma_phi == 0.0,
            "cannot be combined with sigma_phi_rad",
        )?;
        check("trials", self.trials >= 1, "must be at least 1")?;
        check(
            "sigma_max_rad",
            self.sigma_max_rad.is_finite() && self.sigma_max_rad >= 0.0,
            "must be non-negative",
        )?;
        positive("sigma_step_rad", self.sigma_step_rad)?;
        check(
            "sweep_antennas",
            !self.sweep_antennas.is_empty() && self.sweep_antennas.iter().all(|&n| n >= 1),
            "must list one or more sizes of at least 1",
        )?;
        positive("psf_aperture_m", self.psf_aperture_m)?;
        positive("psf_z0_m", self.psf_z0_m)?;
        check(
            "psf_theta_limit_rad",
            self.psf_theta_limit_rad > 0.0 && self.psf_theta_limit_rad < std::f64::consts::FRAC_PI_2,
            "must lie in (0, pi/2)",
        )?;
        check("psf_looks", self.psf_looks >= 2, "must be at least 2")?;
        check(
            "separation_m",
            self.separation_m.is_finite() && self.separation_m >= 0.0,
            "must be non-negative",
        )?;
        check("offset_x_m", self.offset_x_m.is_finite(), "must be finite")?;
        // cross-field checks
        self.imaging(None).map(|_| ())
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("frequency_hz", self.frequency_hz.to_string());
        put("n_antennas", self.n_antennas.to_string());
        put("spacing_m", self.spacing_m.to_string());
        put("z0_m", self.z0_m.to_string());
        if let Some(z) = self.z_focus_m {
            put("z_focus_m", z.to_string());
        }
        if let Some(t) = self.theta_limit_rad {
            put("theta_limit_rad", t.to_string());
        }
        put("amplitude_exponent", self.amplitude_exponent.to_string());
        put("tx_amplitude", self.tx_amplitude.to_string());
        if let Some(g) = self.grid_size {
            put("grid_size", g.to_string());
        }
        let imp = &self.impairments;
        put(
            "snr_db",
            imp.snr_db.map_or_else(|| "off".to_string(), |s| s.to_string()),
        );
        put(
            "phase_bits",
            imp.phase_bits
                .map_or_else(|| "infinite".to_string(), |b| b.to_string()),
        );
        put("sigma_phi_rad", imp.sigma_phi.to_string());
        put("jitter_s", imp.jitter_s.to_string());
        put("independent_tx_rx", imp.independent_tx_rx.to_string());
        put("seed", imp.seed.to_string());
        if let Some(s) = &self.scene {
            put("scene", s.clone());
        }
        if let Some(o) = &self.out_dir {
            put("out_dir", o.clone());
        }
        put("trials", self.trials.to_string());
        put("sigma_max_rad", self.sigma_max_rad.to_string());
        put("sigma_step_rad", self.sigma_step_rad.to_string());
        put(
            "sweep_antennas",
            self.sweep_antennas
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put("psf_aperture_m", self.psf_aperture_m.to_string());
        put("psf_z0_m", self.psf_z0_m.to_string());
        put("psf_theta_limit_rad", self.psf_theta_limit_rad.to_string());
        put("psf_looks", self.psf_looks.to_string());
        put("separation_m", self.separation_m.to_string());
        put("offset_x_m", self.offset_x_m.to_string());
        out
    }
}

fn check(key: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(key_error(key, message))
    }
}

fn key_error(key: &str, message: impl Into<String>) -> ImagingError {
    ImagingError::ConfigKey {
        key: key.to_string(),
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| key_error(key, format!("cannot parse `{raw}`")))
}

fn boolean(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(key_error(key, format!("expected true or false, got `{raw}`"))),
    }
}

/// Parses and validates a config, applying defaults for absent keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ImagingError::Parse {
                path: "config".into(),
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
            return Err(key_error(key, "unknown key"));
        }
        if entries.insert(key.to_string(), value.to_string()).is_some() {
            return Err(key_error(key, "given more than once"));
        }
    }
    for key in REQUIRED_KEYS {
        if !entries.contains_key(key) {
            return Err(key_error(key, "missing required key"));
        }
    }
    let get = |k: &str| entries.get(k).map(String::as_str);
    let mut cfg = ExperimentConfig::new(
        number("frequency_hz", get("frequency_hz").unwrap())?,
        number("n_antennas", get("n_antennas").unwrap())?,
        number("spacing_m", get("spacing_m").unwrap())?,
        number("z0_m", get("z0_m").unwrap())?,
    );
    for (key, raw) in &entries {
        let raw = raw.as_str();
        let k = key.as_str();
        match k {
            "frequency_hz" | "n_antennas" | "spacing_m" | "z0_m" => {}
            "z_focus_m" => cfg.z_focus_m = Some(number(k, raw)?),
            "theta_limit_rad" => cfg.theta_limit_rad = Some(number(k, raw)?),
            "amplitude_exponent" => cfg.amplitude_exponent = number(k, raw)?,
            "tx_amplitude" => cfg.tx_amplitude = number(k, raw)?,
            "grid_size" => cfg.grid_size = Some(number(k, raw)?),
            "snr_db" => {
                cfg.impairments.snr_db = match raw {
                    "off" | "none" => None,
                    _ => Some(number(k, raw)?),
                }
            }
            "phase_bits" => {
                cfg.impairments.phase_bits = match raw {
                    "infinite" | "none" => None,
                    _ => Some(number(k, raw)?),
                }
            }
            "sigma_phi_rad" => cfg.impairments.sigma_phi = number(k, raw)?,
            "jitter_s" => cfg.impairments.jitter_s = number(k, raw)?,
            "independent_tx_rx" => cfg.impairments.independent_tx_rx = boolean(k, raw)?,
            "seed" => cfg.impairments.seed = number(k, raw)?,
            "scene" => cfg.scene = Some(raw.to_string()),
            "out_dir" => cfg.out_dir = Some(raw.to_string()),
            "trials" => cfg.trials = number(k, raw)?,
            "sigma_max_rad" => cfg.sigma_max_rad = number(k, raw)?,
            "sigma_step_rad" => cfg.sigma_step_rad = number(k, raw)?,
            "sweep_antennas" => {
                cfg.sweep_antennas = raw
                    .split(',')
                    .map(|s| number(k, s.trim()))
                    .collect::<Result<_>>()?
            }
            "psf_aperture_m" => cfg.psf_aperture_m = number(k, raw)?,
            "psf_z0_m" => cfg.psf_z0_m = number(k, raw)?,
            "psf_theta_limit_rad" => cfg.psf_theta_limit_rad = number(k, raw)?,
            "psf_looks" => cfg.psf_looks = number(k, raw)?,
            "separation_m" => cfg.separation_m = number(k, raw)?,
            "offset_x_m" => cfg.offset_x_m = number(k, raw)?,
            _ => unreachable!("key list and match arms disagree on `{k}`"),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}
