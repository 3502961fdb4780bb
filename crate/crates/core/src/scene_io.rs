//! Scene files: reflector lists as CSV (`x_m,y_m,amp_re,amp_im`) and rasters
//! as binary PGM with a `key = value` sidecar (`<file>.meta`) holding
//! `pitch_m`, `origin_x_m` and `origin_y_m`. PGM rows map to increasing y.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{ImagingError, Result};
use crate::model::{Reflector, Scene};
use crate::scenes;

pub const BUILTIN_SCENES: [&str; 3] = ["t-target", "two-point", "point"];

/// Builtin name or file path.
pub fn resolve_scene(source: &str, wavelength: f64, separation_m: f64) -> Result<Scene> {
    match source {
        "t-target" => scenes::t_target(wavelength / 4.0),
        "two-point" => scenes::two_point(separation_m, (0.0, 0.0)),
        "point" => scenes::point(0.0, 0.0),
        path => load_scene(Path::new(path)),
    }
}

/// Loads a `.pgm` raster (with sidecar) or a reflector CSV.
pub fn load_scene(path: &Path) -> Result<Scene> {
    let is_pgm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        let bytes = fs::read(path)?;
        let meta_path = sidecar_path(path);
        let meta = fs::read_to_string(&meta_path)?;
        load_raster(&bytes, &meta, path, &meta_path)
    } else {
        parse_scene_csv(&fs::read_to_string(path)?, &path.display().to_string())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> ImagingError {
    ImagingError::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Reflector rows; an optional header row starting with `x_m` is skipped.
pub fn parse_scene_csv(text: &str, source: &str) -> Result<Scene> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut reflectors = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if reflectors.is_empty() && record.get(0) == Some("x_m") {
            continue;
        }
        if record.len() != 4 {
            return Err(parse_error(
                source,
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| parse_error(source, line, format!("bad number `{field}`")))?;
        }
        reflectors.push(Reflector::new(v[0], v[1], Complex64::new(v[2], v[3])));
    }
    if reflectors.is_empty() {
        return Err(parse_error(source, 0, "no reflectors"));
    }
    Scene::points(reflectors)
}

fn load_raster(bytes: &[u8], meta: &str, path: &Path, meta_path: &Path) -> Result<Scene> {
    let src = path.display().to_string();
    let (cols, rows, maxval, data) = parse_pgm(bytes).map_err(|m| parse_error(&src, 1, m))?;
    let meta_src = meta_path.display().to_string();
    let (mut pitch, mut ox, mut oy) = (None, None, None);
    for (i, line) in meta.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_error(&meta_src, i + 1, "expected `key = value`"))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| parse_error(&meta_src, i + 1, format!("bad number `{}`", v.trim())))?;
        match k.trim() {
            "pitch_m" => pitch = Some(value),
            "origin_x_m" => ox = Some(value),
            "origin_y_m" => oy = Some(value),
            other => return Err(parse_error(&meta_src, i + 1, format!("unknown key `{other}`"))),
        }
    }
    let missing = |name: &str| parse_error(&meta_src, 0, format!("missing `{name}`"));
    let pitch = pitch.ok_or_else(|| missing("pitch_m"))?;
    let origin = (ox.ok_or_else(|| missing("origin_x_m"))?, oy.ok_or_else(|| missing("origin_y_m"))?);
    let scale = 1.0 / maxval as f64;
    let pixels = Array2::from_shape_fn((rows, cols), |(r, c)| {
        Complex64::new(data[r * cols + c] as f64 * scale, 0.0)
    });
    Scene::raster(pixels, pitch, origin)
}

/// Binary 8-bit PGM: `(width, height, maxval, samples)`.
pub fn parse_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, u32, &[u8]), String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<&[u8], String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        Ok(&bytes[start..pos])
    };
    if token()? != b"P5" {
        return Err("not a binary PGM (P5)".into());
    }
    let mut num = |what: &str| -> std::result::Result<usize, String> {
        let t = token()?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what}"))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // exactly one whitespace byte separates the header from the samples
    let start = pos + 1;
    let end = start + width * height;
    if width == 0 || height == 0 || end > bytes.len() {
        return Err("pixel data too short".into());
    }
    Ok((width, height, maxval as u32, &bytes[start..end]))
}
