//! Built-in test scenes.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{ImagingError, Result};
use crate::model::{Reflector, Scene};

pub const T_HEIGHT_M: f64 = 27.5e-3;
pub const T_WIDTH_M: f64 = 22.5e-3;
pub const T_STROKE_M: f64 = 5e-3;

/// Unit-reflectivity T centred on the origin, rasterized at `pitch`
/// (bar on top, i.e. at the largest y).
pub fn t_target(pitch: f64) -> Result<Scene> {
    if !(pitch > 0.0 && pitch <= T_STROKE_M) {
        return Err(ImagingError::InvalidConfig(format!(
            "T-target pitch must be in (0, {T_STROKE_M}], got {pitch}"
        )));
    }
    let count = |len: f64| ((len / pitch).round() as usize).max(1);
    let (rows, cols, stroke) = (count(T_HEIGHT_M), count(T_WIDTH_M), count(T_STROKE_M));
    let stem_lo = (cols - stroke) / 2;
    let pixels = Array2::from_shape_fn((rows, cols), |(r, c)| {
        let bar = r >= rows - stroke;
        let stem = c >= stem_lo && c < stem_lo + stroke;
        if bar || stem {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let origin = (
        -((cols - 1) as f64) / 2.0 * pitch,
        -((rows - 1) as f64) / 2.0 * pitch,
    );
    Scene::raster(pixels, pitch, origin)
}

/// Two unit reflectors at `(cx - sep/2, cy)` and `(cx + sep/2, cy)`.
pub fn two_point(separation: f64, centre: (f64, f64)) -> Result<Scene> {
    Scene::points(vec![
        Reflector::unit(centre.0 - separation / 2.0, centre.1),
        Reflector::unit(centre.0 + separation / 2.0, centre.1),
    ])
}

pub fn point(x: f64, y: f64) -> Result<Scene> {
    Scene::points(vec![Reflector::unit(x, y)])
}
