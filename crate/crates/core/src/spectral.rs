//! Discrete Fourier transforms with a fixed convention.
//!
//! Forward: `X[u] = sum_n x[n] exp(-j 2 pi u n / N)` (unnormalized).
//! Inverse: `x[n] = (1/N) sum_u X[u] exp(+j 2 pi u n / N)`.
//! In 2D the inverse carries `1 / (rows * cols)`.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{ImagingError, Result};

fn transform_lanes(data: &mut Array2<Complex64>, axis: Axis, direction: FftDirection) {
    let len = data.len_of(axis);
    let fft = FftPlanner::new().plan_fft(len, direction);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for mut lane in data.lanes_mut(axis) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process(&mut buf);
        for (v, b) in lane.iter_mut().zip(&buf) {
            *v = *b;
        }
    }
}

fn transform2(matrix: &Array2<Complex64>, direction: FftDirection) -> Result<Array2<Complex64>> {
    if matrix.is_empty() {
        return Err(ImagingError::Empty("cannot transform an empty matrix"));
    }
    let mut out = matrix.to_owned();
    transform_lanes(&mut out, Axis(1), direction);
    transform_lanes(&mut out, Axis(0), direction);
    Ok(out)
}

pub fn dft2(matrix: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    transform2(matrix, FftDirection::Forward)
}

pub fn idft2(matrix: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let mut out = transform2(matrix, FftDirection::Inverse)?;
    let scale = 1.0 / out.len() as f64;
    out.mapv_inplace(|v| v * scale);
    Ok(out)
}

pub fn dft(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(ImagingError::Empty("cannot transform an empty vector"));
    }
    let mut out = samples.to_vec();
    FftPlanner::new().plan_fft_forward(out.len()).process(&mut out);
    Ok(out)
}

pub fn idft(samples: &[Complex64]) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(ImagingError::Empty("cannot transform an empty vector"));
    }
    let mut out = samples.to_vec();
    FftPlanner::new().plan_fft_inverse(out.len()).process(&mut out);
    let scale = 1.0 / out.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Index in an FFT buffer of length `n` holding signed frequency/lag `m`.
#[inline]
pub fn wrap_index(m: isize, n: usize) -> usize {
    m.rem_euclid(n as isize) as usize
}
