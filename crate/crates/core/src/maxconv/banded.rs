//! Log-domain convolution `ln Σ_{i+j=k} exp(x_i + y_j)` for exponents spread
//! over far more than the ~700 nats a double can hold.
//!
//! Exponents are cut into bands of width `W`. An entry in band `p` is stored
//! as `exp(x_i + pW) ∈ (e^{-W}, 1]` at position `i + p·S`, where `S` is the
//! output length, so a single real convolution produces, at `k + s·S`, the
//! sum over all band pairs with `p + q = s`. Occupied slots exceed
//! `e^{-2W}` while empty ones hold only transform noise, which keeps the
//! two apart as long as the noise stays well below that level.

use super::fft::{convolve, error_bound, fast_len, UNIT_ROUNDOFF};
use crate::error::{Error, Result};

pub(crate) struct LogConvolution {
    pub ln_values: Vec<f64>,
    /// Bound on `|computed - true|` for each entry of `ln_values`.
    pub ln_errors: Vec<f64>,
    /// Absolute error bound of the packed convolution.
    pub fft_error: f64,
}

/// Relative accuracy we aim for in the smallest occupied slot.
const TARGET_RELATIVE: f64 = 1e-7;

fn band_width(x_len: usize, y_len: usize, span: f64) -> f64 {
    // The packed length depends on W only mildly through log₂L, so one
    // guess at W = 3 is enough to size the noise.
    let guess = fast_len(((span / 3.0) as usize + 2) * (x_len + y_len));
    let noise = error_bound(guess, (x_len as f64).sqrt(), (y_len as f64).sqrt());
    (0.5 * (TARGET_RELATIVE / noise).ln()).clamp(1.0, 12.0)
}

fn pack(x: &[f64], width: f64, stride: usize) -> Vec<f64> {
    let bands: Vec<usize> = x.iter().map(|&e| (-e / width).floor() as usize).collect();
    let count = bands.iter().max().unwrap() + 1;
    let mut packed = vec![0.0; (count - 1) * stride + x.len()];
    for (i, (&e, &p)) in x.iter().zip(&bands).enumerate() {
        packed[i + p * stride] = (e + p as f64 * width).exp();
    }
    packed
}

/// `x` and `y` must be finite, nonpositive, with maximum exactly 0.
pub(crate) fn log_convolution(x: &[f64], y: &[f64]) -> Result<LogConvolution> {
    debug_assert!(x.iter().chain(y).all(|&e| e <= 0.0 && e.is_finite()));
    let stride = x.len() + y.len() - 1;
    let min_x = x.iter().copied().fold(0.0, f64::min);
    let min_y = y.iter().copied().fold(0.0, f64::min);
    let width = band_width(x.len(), y.len(), -(min_x + min_y));

    let px = pack(x, width, stride);
    let py = pack(y, width, stride);
    let (z, eps) = convolve(&px, &py)?;
    let floor = (-2.0 * width).exp();
    if eps > floor / 4.0 {
        return Err(Error::Numerical(format!(
            "transform noise {eps:e} is not separated from band floor {floor:e}"
        )));
    }
    let threshold = floor / 2.0;
    // Rounding of the band exponents x_i + pW and of exp().
    let exponent_error = 2.0 * UNIT_ROUNDOFF * (-min_x - min_y) + 4.0 * UNIT_ROUNDOFF;

    let slots = z.len().div_ceil(stride);
    let mut ln_values = Vec::with_capacity(stride);
    let mut ln_errors = Vec::with_capacity(stride);
    let mut terms: Vec<(f64, f64)> = Vec::with_capacity(slots);
    for k in 0..stride {
        terms.clear();
        for s in 0..slots {
            let idx = k + s * stride;
            if idx >= z.len() {
                break;
            }
            if z[idx] > threshold {
                terms.push((z[idx].ln() - s as f64 * width, s as f64 * width));
            }
        }
        if terms.is_empty() {
            return Err(Error::Numerical(format!(
                "coefficient {k} vanished below the transform noise"
            )));
        }
        let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut noise = 0.0;
        for &(ln_z, shift) in &terms {
            total += (ln_z - top).exp();
            // each slot is off by at most eps + 4u·z, scaled like the slot
            noise += eps * (-shift - top).exp() + 4.0 * UNIT_ROUNDOFF * (ln_z - top).exp();
        }
        let rel = noise / total;
        if rel >= 0.5 {
            return Err(Error::Numerical(format!(
                "coefficient {k} is dominated by transform noise"
            )));
        }
        let value = top + total.ln();
        ln_values.push(value);
        ln_errors
            .push(exponent_error + rel / (1.0 - rel) + 16.0 * UNIT_ROUNDOFF * (1.0 + value.abs()));
    }
    Ok(LogConvolution {
        ln_values,
        ln_errors,
        fft_error: eps,
    })
}
