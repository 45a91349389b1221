use num_complex::Complex64;

use super::{ratio_row, ApproxResult, Method, MAX_ORDER};
use crate::error::{Error, Result};
use crate::vector::RealVector;

/// Trapezoid-rule parameters for the contour estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourParams {
    /// Which `R^{(k)}` to integrate.
    pub k: usize,
    /// Radius of the circle in the `1/t` plane. Must be small enough that
    /// `F_v` has no root of modulus `>= 1/radius`; nothing here can check that.
    pub radius: f64,
    pub nodes: usize,
}

impl Default for ContourParams {
    fn default() -> Self {
        ContourParams {
            k: 1,
            radius: 0.1,
            nodes: 64,
        }
    }
}

/// Below this modulus of the shifted power sum the contour is treated as
/// passing through (or next to) a root of `F_v`.
const MIN_SHIFTED_MODULUS: f64 = 1e-8;

/// Recovers `max(v)` for integral `v` as the mean of `R_v^{(k)}(1/s)` over the
/// circle `|s| = radius`, discretised with `nodes` equispaced points.
pub fn contour_max(v: &RealVector, params: ContourParams) -> Result<ApproxResult> {
    v.require_integral()?;
    let ContourParams { k, radius, nodes } = params;
    if k == 0 {
        return Err(Error::param("k", "derivative order must be at least 1"));
    }
    if k > MAX_ORDER {
        return Err(Error::OrderLimit {
            k,
            limit: MAX_ORDER,
        });
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param(
            "radius",
            format!("must be finite and > 0, got {radius}"),
        ));
    }
    if nodes < 4 {
        return Err(Error::param(
            "nodes",
            format!("need at least 4 nodes, got {nodes}"),
        ));
    }

    let top = v.max();
    let row = ratio_row(k);
    let log_radius = radius.ln();
    let mut acc = 0.0;
    for j in 0..nodes {
        let phi = std::f64::consts::TAU * j as f64 / nodes as f64;
        // ln t for t = 1 / (radius · e^{iφ})
        let log_t = Complex64::new(-log_radius, -phi);
        acc += ratio_at_complex(v.entries(), top, log_t, k, &row)?.re;
    }
    Ok(ApproxResult::new(
        acc / nodes as f64,
        Method::Contour { k, radius, nodes },
        1.0 / radius,
    ))
}

fn ratio_at_complex(
    v: &[f64],
    top: f64,
    log_t: Complex64,
    k: usize,
    row: &[f64],
) -> Result<Complex64> {
    let mut moments = vec![Complex64::new(0.0, 0.0); k + 1];
    for &x in v {
        let d = x - top;
        let w = (log_t * d).exp();
        let mut p = w;
        moments[0] += w;
        for m in moments.iter_mut().skip(1) {
            p *= d;
            *m += p;
        }
    }
    let sum = moments[0];
    if !(sum.norm() >= MIN_SHIFTED_MODULUS) {
        return Err(Error::Numerical(format!(
            "power sum nearly vanishes on the contour (|F| = {:e} after shifting); \
             choose a smaller radius",
            sum.norm()
        )));
    }
    let raw: Vec<Complex64> = moments[1..].iter().map(|m| m / sum).collect();

    let mut kappa = vec![Complex64::new(0.0, 0.0); k];
    for i in 1..=k {
        let mut acc = raw[i - 1];
        let mut binom = 1.0;
        for j in 1..i {
            acc -= kappa[j - 1] * raw[i - j - 1] * binom;
            binom = binom * (i - j) as f64 / j as f64;
        }
        kappa[i - 1] = acc;
    }
    kappa[0] += top;
    Ok(row.iter().zip(&kappa).map(|(a, d)| d * *a).sum())
}
