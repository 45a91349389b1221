use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxconv::{minconv_float, Algorithm, MaxConvOptions};
use crate::vector::RealVector;

/// Input-function polynomial, lowest degree first: a least-squares fit to a
/// standard network-calculus textbook example.
pub const INPUT_CURVE: [f64; 8] = [
    0.0, 1.6738, -0.7492, -0.08694, 0.1085, -0.01101, -0.001579, 0.0002085,
];

/// Time horizon of [`INPUT_CURVE`]; past it the fit blows up.
pub const INPUT_CURVE_T_MAX: f64 = 6.0;

const SPACING_TOLERANCE: f64 = 1e-9;

/// A function sampled at `T_k = k·h`, `k = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveGrid {
    times: Vec<f64>,
    values: Vec<f64>,
    monotone: bool,
}

impl CurveGrid {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::param("times", "a grid needs at least two samples"));
        }
        if let Some(i) = times.iter().chain(&values).position(|x| !x.is_finite()) {
            return Err(Error::param(
                "grid",
                format!("sample {} is not finite", i % times.len()),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::param(
                "times",
                format!("must start at 0, got {}", times[0]),
            ));
        }
        let step = times[1];
        if !(step > 0.0) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        for (k, &t) in times.iter().enumerate() {
            let want = k as f64 * step;
            if (t - want).abs() > SPACING_TOLERANCE * want.max(step) {
                return Err(Error::param(
                    "times",
                    format!("sample {k} at {t} breaks the uniform spacing {step}"),
                ));
            }
        }
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);
        Ok(CurveGrid {
            times,
            values,
            monotone,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values never decrease.
    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn step(&self) -> f64 {
        self.times[1]
    }

    fn with_values(&self, values: Vec<f64>) -> CurveGrid {
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);
        CurveGrid {
            times: self.times.clone(),
            values,
            monotone,
        }
    }

    fn same_grid(&self, other: &CurveGrid) -> bool {
        self.len() == other.len()
            && (self.step() - other.step()).abs() <= SPACING_TOLERANCE * self.step()
    }
}

/// Samples the polynomial `Σ c_i T^i` at `N` equally spaced points of `[0, T_max]`.
pub fn discretize(coefficients: &[f64], t_max: f64, n: usize) -> Result<CurveGrid> {
    if n < 2 {
        return Err(Error::param("n", "need at least two samples"));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param(
            "t_max",
            format!("must be finite and > 0, got {t_max}"),
        ));
    }
    let times: Vec<f64> = (0..n).map(|k| k as f64 * t_max / (n - 1) as f64).collect();
    let values = times
        .iter()
        .map(|&t| coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c))
        .collect();
    CurveGrid::new(times, values)
}

/// `rate·max(0, T - latency)` sampled on the times of `like`.
pub fn rate_latency(like: &CurveGrid, rate: f64, latency: f64) -> CurveGrid {
    like.with_values(
        like.times
            .iter()
            .map(|&t| rate * (t - latency).max(0.0))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceOptions {
    /// Base of the max-direction pipeline; `None` means `max(N-1, 2)^25`.
    pub t: Option<f64>,
    pub alpha: f64,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            t: None,
            alpha: 1.01,
        }
    }
}

impl ServiceOptions {
    pub fn base_for(&self, n: usize) -> f64 {
        self.t.unwrap_or_else(|| ((n.max(3) - 1) as f64).powi(25))
    }
}

/// Lower and upper envelopes of the output function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceBounds {
    /// `min_{s<=k} R_s + β_{k-s}`
    pub lower: CurveGrid,
    /// `min_{s<=k} R_s + γ_{k-s}`
    pub upper: CurveGrid,
    /// Numerical error bounds of each estimate (the difference quotient
    /// itself overestimates the minimum).
    pub lower_errors: Vec<f64>,
    pub upper_errors: Vec<f64>,
    pub t: f64,
    pub alpha: f64,
}

/// Service-curve envelopes by the real-valued difference-quotient min-plus
/// convolution, truncated to the input grid.
pub fn service_bounds(
    input: &CurveGrid,
    beta: &CurveGrid,
    gamma: &CurveGrid,
    opts: &ServiceOptions,
) -> Result<ServiceBounds> {
    for (name, other) in [("beta", beta), ("gamma", gamma)] {
        if !input.same_grid(other) {
            return Err(Error::GridMismatch(format!(
                "{name} has {} samples at spacing {}, input has {} at {}",
                other.len(),
                other.step(),
                input.len(),
                input.step()
            )));
        }
    }
    let n = input.len();
    let t = opts.base_for(n);
    let conv_opts = MaxConvOptions {
        t_star: Some(t),
        alpha_star: Some(opts.alpha),
        ..Default::default()
    };
    let r = RealVector::new(input.values.clone())?;
    let envelope = |curve: &CurveGrid| -> Result<(CurveGrid, Vec<f64>)> {
        let c = RealVector::new(curve.values.clone())?;
        let out = minconv_float(&r, &c, Algorithm::Difference, &conv_opts)?;
        Ok((
            input.with_values(out.coefficients[..n].to_vec()),
            out.raw_errors[..n].to_vec(),
        ))
    };
    let (lower, upper) = rayon::join(|| envelope(beta), || envelope(gamma));
    let (lower, lower_errors) = lower?;
    let (upper, upper_errors) = upper?;
    Ok(ServiceBounds {
        lower,
        upper,
        lower_errors,
        upper_errors,
        t,
        alpha: opts.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretize_examples() {
        let g = discretize(&[1.0], 2.0, 3).unwrap();
        assert_eq!(g.values(), &[1.0, 1.0, 1.0]);
        let g = discretize(&[0.0, 1.0], 4.0, 5).unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(g.is_monotone());
        let g = discretize(&INPUT_CURVE, INPUT_CURVE_T_MAX, 10).unwrap();
        assert_eq!(g.values()[0], 0.0);
        assert!(discretize(&[1.0], 2.0, 1).is_err());
        assert!(discretize(&[1.0], 0.0, 3).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(CurveGrid::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(CurveGrid::new(vec![0.5, 1.0], vec![1.0, 2.0]).is_err());
        assert!(CurveGrid::new(vec![0.0, 1.0, 2.5], vec![1.0, 2.0, 3.0]).is_err());
        assert!(CurveGrid::new(vec![0.0], vec![1.0]).is_err());
        let g = CurveGrid::new(
            vec![0.0, 0.1, 0.2, 0.30000000000000004],
            vec![3.0, 2.0, 1.0, 0.0],
        );
        assert!(!g.unwrap().is_monotone());
    }

    #[test]
    fn rate_latency_curves() {
        let g = discretize(&[0.0], 6.0, 7).unwrap();
        assert_eq!(
            rate_latency(&g, 1.0, 3.0).values(),
            &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0]
        );
        assert_eq!(rate_latency(&g, 2.0, 0.0).values()[6], 12.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = discretize(&[0.0, 1.0], 6.0, 10).unwrap();
        let b = discretize(&[0.0, 1.0], 6.0, 11).unwrap();
        let c = discretize(&[0.0, 1.0], 7.0, 10).unwrap();
        let opts = ServiceOptions::default();
        assert!(matches!(
            service_bounds(&a, &b, &a, &opts),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            service_bounds(&a, &a, &c, &opts),
            Err(Error::GridMismatch(_))
        ));
    }
}
