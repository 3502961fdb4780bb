//! Output artifacts. Every writer is a pure function of its input, so reruns
//! with the same config and seed produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::SslCurve;
use crate::error::Result;
use crate::reconstruction::Image;

/// Image as CSV text: one line `rows,cols,pitch_x_m,pitch_y_m,origin_x_m,origin_y_m`
/// with those values, then one `re,im` line per pixel in row-major order.
pub fn image_csv(image: &Image) -> String {
    let (rows, cols) = image.pixels.dim();
    let mut out = format!(
        "{rows},{cols},{},{},{},{}\n",
        image.pitch.0, image.pitch.1, image.origin.0, image.origin.1
    );
    for v in image.pixels.iter() {
        let _ = writeln!(out, "{},{}", v.re, v.im);
    }
    out
}

/// 8-bit binary PGM of the magnitude, scaled so the peak maps to 255 and
/// rounded half up. An all-zero image stays zero.
pub fn image_pgm(image: &Image) -> Vec<u8> {
    let (rows, cols) = image.pixels.dim();
    let mag = image.magnitude();
    let peak = mag.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(mag.iter().map(|&m| {
        if peak > 0.0 {
            (m / peak * 255.0 + 0.5).floor().min(255.0) as u8
        } else {
            0
        }
    }));
    out
}

/// Writes `<prefix>.csv` and `<prefix>.pgm`.
pub fn write_image(image: &Image, prefix: &Path) -> Result<Vec<PathBuf>> {
    let csv = prefix.with_extension("csv");
    let pgm = prefix.with_extension("pgm");
    fs::write(&csv, image_csv(image))?;
    fs::write(&pgm, image_pgm(image))?;
    Ok(vec![csv, pgm])
}

pub fn ssl_curve_csv(curve: &SslCurve) -> String {
    let mut out = String::from("sigma_rad,ssl_db\n");
    for (s, v) in curve.sigma_values.iter().zip(&curve.ssl_db) {
        let _ = writeln!(out, "{s},{v}");
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Run record: inputs, seed and a checksum per artifact.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
    pub artifacts: Vec<PathBuf>,
}

impl Manifest {
    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Renders the manifest; artifact names are relative to `dir`.
    pub fn render(&self, dir: &Path) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        for path in &self.artifacts {
            let name = path.strip_prefix(dir).unwrap_or(path);
            let digest = sha256_hex(&fs::read(path)?);
            let _ = writeln!(out, "artifact {} sha256 {digest}", name.display());
        }
        Ok(out)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.txt");
        fs::write(&path, self.render(dir)?)?;
        Ok(path)
    }
}
