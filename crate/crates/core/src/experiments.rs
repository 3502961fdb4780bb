//! Experiment recipes behind the `imgsim` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::{
    array_gain_db, breakpoint_fit, breakpoint_model_fit, image_error, measured_processing_gain_db,
    refined_peaks, resolution_beamsteer, resolution_switched, sigma_range, ssl_sweep,
    BreakpointParams, BreakpointReport, ImageMetrics, SslCurve,
};
use crate::config::ExperimentConfig;
use crate::error::{ImagingError, Result};
use crate::forward::{beamsteer_echo, switched_echo, EchoData};
use crate::impairments::ImpairmentSpec;
use crate::model::{build_steering_grid, element_coordinates, ImagingConfig, Scene, SteeringGrid};
use crate::output::{sha256_hex, ssl_curve_csv, write_image, Manifest};
use crate::reconstruction::{reconstruct_beamsteer, reconstruct_switched_mf, Image};
use crate::scene_io::resolve_scene;
use crate::scenes;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SimulateBeamsteer,
    SimulateSwitched,
    Reconstruct,
    CompareMethods,
    PsfSweep,
    BreakpointFit,
    TwoReflector,
    Resolution,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::SimulateBeamsteer,
        Subcommand::SimulateSwitched,
        Subcommand::Reconstruct,
        Subcommand::CompareMethods,
        Subcommand::PsfSweep,
        Subcommand::BreakpointFit,
        Subcommand::TwoReflector,
        Subcommand::Resolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::SimulateBeamsteer => "simulate-beamsteer",
            Subcommand::SimulateSwitched => "simulate-switched",
            Subcommand::Reconstruct => "reconstruct",
            Subcommand::CompareMethods => "compare-methods",
            Subcommand::PsfSweep => "psf-sweep",
            Subcommand::BreakpointFit => "breakpoint-fit",
            Subcommand::TwoReflector => "two-reflector",
            Subcommand::Resolution => "resolution",
        }
    }
}

impl FromStr for Subcommand {
    type Err = ImagingError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ImagingError::InvalidConfig(format!("unknown subcommand `{s}`")))
    }
}

/// Scene geometry plus the steering grid sized for it.
pub struct Setup {
    pub scene: Scene,
    pub imaging: ImagingConfig,
    pub grid: SteeringGrid,
}

pub fn setup(cfg: &ExperimentConfig, scene: Scene) -> Result<Setup> {
    let imaging = cfg.imaging(scene.bounds())?;
    let grid = build_steering_grid(&imaging, cfg.grid_size())?;
    Ok(Setup {
        scene,
        imaging,
        grid,
    })
}

pub fn simulate_beamsteer(s: &Setup, imp: &ImpairmentSpec) -> Result<EchoData> {
    beamsteer_echo(&s.scene, &s.grid, &s.imaging, imp)
}

pub fn simulate_switched(s: &Setup, imp: &ImpairmentSpec) -> Result<EchoData> {
    switched_echo(&s.scene, &s.imaging, imp)
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub beamsteer: Image,
    pub switched: Image,
    pub beamsteer_metrics: ImageMetrics,
    pub switched_metrics: ImageMetrics,
}

/// Both pipelines on the same scene at equal total transmit power and the
/// same per-element SNR.
pub fn compare_methods(s: &Setup, imp: &ImpairmentSpec) -> Result<Comparison> {
    let z_f = s.imaging.focus();
    let beamsteer = reconstruct_beamsteer(&simulate_beamsteer(s, imp)?, &s.grid, &s.imaging, z_f)?;
    let switched = reconstruct_switched_mf(&simulate_switched(s, imp)?, &s.imaging, z_f)?;
    Ok(Comparison {
        beamsteer_metrics: image_error(&beamsteer, &s.scene)?,
        switched_metrics: image_error(&switched, &s.scene)?,
        beamsteer,
        switched,
    })
}

/// Distance between the two strongest peaks along the image row nearest
/// `y`, with sub-pixel refinement.
pub fn pair_separation(image: &Image, y: f64) -> Option<f64> {
    let (row, _) = image.pixel_of(0.0, y);
    let profile: Vec<f64> = image.pixels.row(row).iter().map(|v| v.norm()).collect();
    let peaks = refined_peaks(&profile);
    (peaks.len() >= 2).then(|| (peaks[0].0 - peaks[1].0).abs() * image.pitch.0)
}

#[derive(Debug, Clone)]
pub struct PairStudy {
    pub broadside: Image,
    pub off_broadside: Image,
    pub broadside_separation: Option<f64>,
    pub off_broadside_separation: Option<f64>,
}

/// Beam-steered images of a reflector pair centred on broadside and at
/// `offset_x_m`, both on the same steering grid. Defaults to a 2-bit
/// quantizer when the config leaves the phase shifters ideal.
pub fn two_reflector_study(cfg: &ExperimentConfig) -> Result<PairStudy> {
    let imaging = cfg.imaging(None)?;
    let grid = build_steering_grid(&imaging, cfg.grid_size())?;
    let imp = ImpairmentSpec {
        phase_bits: Some(cfg.impairments.phase_bits.unwrap_or(2)),
        ..cfg.impairments.clone()
    };
    let image_at = |cx: f64| -> Result<Image> {
        let scene = scenes::two_point(cfg.separation_m, (cx, 0.0))?;
        let echo = beamsteer_echo(&scene, &grid, &imaging, &imp)?;
        reconstruct_beamsteer(&echo, &grid, &imaging, imaging.focus())
    };
    let broadside = image_at(0.0)?;
    let off_broadside = image_at(cfg.offset_x_m)?;
    Ok(PairStudy {
        broadside_separation: pair_separation(&broadside, 0.0),
        off_broadside_separation: pair_separation(&off_broadside, 0.0),
        broadside,
        off_broadside,
    })
}

/// SSL sweep for each configured array size.
pub fn psf_sweeps(cfg: &ExperimentConfig) -> Result<Vec<SslCurve>> {
    let study = cfg.psf_study();
    let sigmas = sigma_range(0.0, cfg.sigma_max_rad, cfg.sigma_step_rad);
    cfg.sweep_antennas
        .iter()
        .map(|&n| ssl_sweep(&study, n, &sigmas, cfg.trials, cfg.seed()))
        .collect()
}

#[derive(Debug, Clone)]
pub struct BreakpointStudy {
    pub curves: Vec<SslCurve>,
    pub reports: Vec<BreakpointReport>,
    /// `(slope, intercept)` of the breakpoint against `log10(n)`.
    pub sb_model: Option<(f64, f64)>,
    pub tb_model: Option<(f64, f64)>,
}

pub fn breakpoint_study(cfg: &ExperimentConfig) -> Result<BreakpointStudy> {
    let curves = psf_sweeps(cfg)?;
    let params = BreakpointParams::default();
    let reports = curves
        .iter()
        .map(|c| breakpoint_fit(c, &params))
        .collect::<Result<Vec<_>>>()?;
    let sb: Vec<(usize, f64)> = curves.iter().zip(&reports).map(|(c, r)| (c.n_antennas, r.sigma_sb)).collect();
    let tb: Vec<(usize, f64)> = curves.iter().zip(&reports).map(|(c, r)| (c.n_antennas, r.sigma_tb)).collect();
    Ok(BreakpointStudy {
        sb_model: breakpoint_model_fit(&sb).ok(),
        tb_model: breakpoint_model_fit(&tb).ok(),
        curves,
        reports,
    })
}

/// Inputs and output location for one run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: ExperimentConfig,
    /// Label of the config source recorded in the manifest.
    pub config_label: String,
    pub config_text: String,
    pub out_dir: PathBuf,
}

impl RunOptions {
    fn scene_source(&self) -> &str {
        self.config.scene.as_deref().unwrap_or("t-target")
    }

    fn scene(&self) -> Result<Scene> {
        let c = &self.config;
        resolve_scene(
            self.scene_source(),
            crate::model::SPEED_OF_LIGHT / c.frequency_hz,
            c.separation_m,
        )
    }
}

fn beamsteer_echo_csv(echo: &EchoData, grid: &SteeringGrid) -> String {
    let mut out = String::from("iy,ix,kx_rad_per_m,ky_rad_per_m,re,im\n");
    for look in &grid.looks {
        let v = echo.samples[[look.iy, look.ix]];
        let _ = writeln!(out, "{},{},{},{},{},{}", look.iy, look.ix, look.kx, look.ky, v.re, v.im);
    }
    out
}

fn switched_echo_csv(echo: &EchoData, imaging: &ImagingConfig) -> String {
    let axis = element_coordinates(imaging.n_antennas, imaging.spacing_m);
    let mut out = String::from("row,col,x_m,y_m,re,im\n");
    for ((r, c), v) in echo.samples.indexed_iter() {
        let _ = writeln!(out, "{r},{c},{},{},{},{}", axis[c], axis[r], v.re, v.im);
    }
    out
}

fn metrics_line(out: &mut String, method: &str, m: &ImageMetrics) {
    let _ = writeln!(
        out,
        "{method},{},{},{}",
        m.peak_offset, m.normalized_rmse, m.peak_to_background_db
    );
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| x.to_string())
}

/// Runs one subcommand, writing its artifacts and `manifest.txt` into the
/// output directory. Returns every file written.
pub fn run_experiment(sub: Subcommand, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    let cfg = &opts.config;
    cfg.validate()?;
    let dir = opts.out_dir.as_path();
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest::default();
    manifest.input("subcommand", sub.name());
    manifest.input("config", &opts.config_label);
    manifest.input("config_sha256", sha256_hex(opts.config_text.as_bytes()));
    manifest.input("seed", cfg.seed());
    let text = |name: &str, body: String, files: &mut Vec<PathBuf>| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, body)?;
        files.push(p);
        Ok(())
    };
    let mut files = Vec::new();

    match sub {
        Subcommand::SimulateBeamsteer | Subcommand::SimulateSwitched | Subcommand::Reconstruct => {
            manifest.input("scene", opts.scene_source());
            let s = setup(cfg, opts.scene()?)?;
            let imp = &cfg.impairments;
            if sub != Subcommand::SimulateSwitched {
                let echo = simulate_beamsteer(&s, imp)?;
                if sub == Subcommand::SimulateBeamsteer {
                    text("echo_beamsteer.csv", beamsteer_echo_csv(&echo, &s.grid), &mut files)?;
                } else {
                    let img = reconstruct_beamsteer(&echo, &s.grid, &s.imaging, s.imaging.focus())?;
                    files.extend(write_image(&img, &dir.join("beamsteer"))?);
                }
            }
            if sub != Subcommand::SimulateBeamsteer {
                let echo = simulate_switched(&s, imp)?;
                if sub == Subcommand::SimulateSwitched {
                    text("echo_switched.csv", switched_echo_csv(&echo, &s.imaging), &mut files)?;
                } else {
                    let img = reconstruct_switched_mf(&echo, &s.imaging, s.imaging.focus())?;
                    files.extend(write_image(&img, &dir.join("switched"))?);
                }
            }
        }
        Subcommand::CompareMethods => {
            manifest.input("scene", opts.scene_source());
            let s = setup(cfg, opts.scene()?)?;
            let cmp = compare_methods(&s, &cfg.impairments)?;
            files.extend(write_image(&cmp.beamsteer, &dir.join("beamsteer"))?);
            files.extend(write_image(&cmp.switched, &dir.join("switched"))?);
            let mut m = String::from("method,peak_offset_m,normalized_rmse,peak_to_background_db\n");
            metrics_line(&mut m, "beamsteer", &cmp.beamsteer_metrics);
            metrics_line(&mut m, "switched", &cmp.switched_metrics);
            text("metrics.csv", m, &mut files)?;
            if let Some(snr) = cfg.impairments.snr_db.filter(|s| s.is_finite()) {
                let g = measured_processing_gain_db(&s.imaging, &s.grid, snr, cfg.seed())?;
                let body = format!(
                    "n_antennas,z0_m,measured_gain_db,array_gain_db\n{},{},{g},{}\n",
                    cfg.n_antennas,
                    cfg.z0_m,
                    array_gain_db(cfg.n_antennas)
                );
                text("gain.csv", body, &mut files)?;
            }
        }
        Subcommand::PsfSweep => {
            for curve in psf_sweeps(cfg)? {
                text(&format!("ssl_n{}.csv", curve.n_antennas), ssl_curve_csv(&curve), &mut files)?;
            }
        }
        Subcommand::BreakpointFit => {
            let study = breakpoint_study(cfg)?;
            let mut b = String::from(
                "n_antennas,sigma_sb_rad,sigma_tb_rad,fit_slope_db_per_rad,fit_intercept_db,floor_db\n",
            );
            for (curve, r) in study.curves.iter().zip(&study.reports) {
                text(&format!("ssl_n{}.csv", curve.n_antennas), ssl_curve_csv(curve), &mut files)?;
                let _ = writeln!(
                    b,
                    "{},{},{},{},{},{}",
                    curve.n_antennas, r.sigma_sb, r.sigma_tb, r.fit_slope, r.fit_intercept, r.floor_db
                );
            }
            text("breakpoints.csv", b, &mut files)?;
            let mut m = String::from("quantity,slope,intercept\n");
            for (name, fit) in [("sigma_sb", study.sb_model), ("sigma_tb", study.tb_model)] {
                let _ = writeln!(m, "{name},{},{}", opt(fit.map(|f| f.0)), opt(fit.map(|f| f.1)));
            }
            text("breakpoint_model.csv", m, &mut files)?;
        }
        Subcommand::TwoReflector => {
            let study = two_reflector_study(cfg)?;
            files.extend(write_image(&study.broadside, &dir.join("broadside"))?);
            files.extend(write_image(&study.off_broadside, &dir.join("off_broadside"))?);
            let body = format!(
                "position,centre_x_m,true_separation_m,measured_separation_m\n\
                 broadside,0,{sep},{}\noff_broadside,{},{sep},{}\n",
                opt(study.broadside_separation),
                cfg.offset_x_m,
                opt(study.off_broadside_separation),
                sep = cfg.separation_m,
            );
            text("separation.csv", body, &mut files)?;
        }
        Subcommand::Resolution => {
            let imaging = cfg.imaging(None)?;
            let sw = resolution_switched(&imaging);
            let mut body = String::from("x_m,y_m,beamsteer_m,switched_m\n");
            for i in 0..=6 {
                let x = i as f64 * 5e-3;
                let bs = resolution_beamsteer(x, 0.0, &imaging).ok();
                let _ = writeln!(body, "{x},0,{},{sw}", opt(bs));
            }
            text("resolution.csv", body, &mut files)?;
        }
    }
    manifest.artifacts = files.clone();
    files.push(manifest.write(dir)?);
    Ok(files)
}

/// Reads a config file and resolves the output directory: explicit
/// `out` wins over the config's `out_dir`, which wins over `out`.
pub fn load_run_options(
    config_path: &Path,
    scene: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<RunOptions> {
    let config_text = fs::read_to_string(config_path)?;
    let mut config = crate::config::parse_config(&config_text)?;
    if let Some(s) = scene {
        config.scene = Some(s);
    }
    if let Some(seed) = seed {
        config.set_seed(seed);
    }
    let out_dir = out
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(RunOptions {
        config,
        config_label: config_path.display().to_string(),
        config_text,
        out_dir,
    })
}
