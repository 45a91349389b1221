use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub(crate) const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Largest transform we are willing to allocate (complex samples).
const MAX_TRANSFORM: usize = 1 << 26;

/// Smallest `2^a·3^b >= n`.
pub(crate) fn fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p3 = 1usize;
    while p3 < best {
        let mut m = p3;
        while m < n {
            m *= 2;
        }
        best = best.min(m);
        p3 *= 3;
    }
    best
}

/// A priori bound on the absolute error of each coefficient of [`convolve`]
/// for inputs with the given Euclidean norms.
pub(crate) fn error_bound(len: usize, norm_x: f64, norm_y: f64) -> f64 {
    let levels = (len.max(2) as f64).log2();
    8.0 * UNIT_ROUNDOFF * levels * norm_x * norm_y
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Linear convolution of two real sequences.
///
/// Both inputs ride in one complex transform (`x` real, `y` imaginary) and
/// are separated in the frequency domain. Returns the coefficients and a bound
/// on the absolute error of every coefficient.
pub(crate) fn convolve(x: &[f64], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let out_len = x.len() + y.len() - 1;
    let len = fast_len(out_len);
    if len > MAX_TRANSFORM {
        return Err(Error::LengthOverflow(out_len));
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Ok((vec![0.0; out_len], 0.0));
    }
    // Balance the norms so neither operand drowns in the other's roundoff.
    let scale = nx / ny;
    let mut buf: Vec<Complex64> = (0..len)
        .map(|i| {
            Complex64::new(
                x.get(i).copied().unwrap_or(0.0),
                y.get(i).map_or(0.0, |v| v * scale),
            )
        })
        .collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);

    // X_k Y_k = (Z_k² - conj(Z_{-k})²) / 4i, filled pairwise in place.
    let quarter_i = Complex64::new(0.0, -0.25);
    for k in 0..=len / 2 {
        let m = (len - k) % len;
        let zk = buf[k];
        let zm = buf[m];
        buf[k] = (zk * zk - zm.conj() * zm.conj()) * quarter_i;
        buf[m] = (zm * zm - zk.conj() * zk.conj()) * quarter_i;
    }

    planner.plan_fft_inverse(len).process(&mut buf);
    let norm_factor = 1.0 / (len as f64 * scale);
    let values = buf[..out_len].iter().map(|z| z.re * norm_factor).collect();
    Ok((values, error_bound(len, nx, ny)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schoolbook(x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len() + y.len() - 1];
        for (i, a) in x.iter().enumerate() {
            for (j, b) in y.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    }

    #[test]
    fn fast_lengths() {
        assert_eq!(fast_len(1), 1);
        assert_eq!(fast_len(5), 6);
        assert_eq!(fast_len(7), 8);
        assert_eq!(fast_len(10), 12);
        assert_eq!(fast_len(17), 18);
        assert_eq!(fast_len(1025), 1152);
    }

    #[test]
    fn matches_schoolbook_within_bound() {
        let x: Vec<f64> = (0..37).map(|i| ((i * 7919) % 13) as f64 - 4.5).collect();
        let y: Vec<f64> = (0..11).map(|i| 1e-6 * ((i * 31) % 5) as f64).collect();
        let (got, eps) = convolve(&x, &y).unwrap();
        for (g, w) in got.iter().zip(schoolbook(&x, &y)) {
            assert!((g - w).abs() <= eps, "{g} vs {w} (eps {eps})");
        }
    }

    #[test]
    fn single_entries() {
        let (got, _) = convolve(&[3.0], &[4.0]).unwrap();
        assert!((got[0] - 12.0).abs() < 1e-14);
        let (got, eps) = convolve(&[0.0, 0.0], &[1.0]).unwrap();
        assert_eq!((got, eps), (vec![0.0, 0.0], 0.0));
    }
}
