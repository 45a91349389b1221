//! Problems that reduce to max- or min-plus convolution.

mod service;

pub use service::{
    discretize, rate_latency, service_bounds, CurveGrid, ServiceBounds, ServiceOptions,
    INPUT_CURVE, INPUT_CURVE_T_MAX,
};

use serde::Serialize;

use crate::error::Result;
use crate::maxconv::{maxconv_float, maxconv_l, Algorithm, MaxConvOptions};
use crate::vector::RealVector;

/// Base used for real-valued input when the caller gives none.
pub const DEFAULT_MCSP_LOG_T: f64 = 40.0;

/// Largest sums of consecutive entries, one per window length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mcsp {
    /// `sums[k - 1]` is the largest sum of `k` consecutive entries,
    /// `k = 1..=n`. The last entry is the full sum.
    pub sums: Vec<f64>,
    /// Bound on `|sums[i] - truth|`; all zero when `exact`.
    pub errors: Vec<f64>,
    pub exact: bool,
}

/// Maximum consecutive subsums via one max-convolution of prefix sums.
///
/// With `P_0 = 0` and `P_k = v_1 + … + v_k`, the vectors `a_i = -P_i` and
/// `b_j = P_{n-j}` (`i, j = 0..n`) give `c_m = max (P_{n-j} - P_i)` over
/// `i + j = m`, the best window of length `n - m`. Integral input is solved
/// exactly (certified); real input runs the LogSumExp pipeline at `t`
/// (default `e^40`) and reports its error.
pub fn mcsp(v: &RealVector, t: Option<f64>) -> Result<Mcsp> {
    let n = v.len();
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(v.entries().iter().scan(0.0, |acc, &e| {
            *acc += e;
            Some(*acc)
        }))
        .collect();
    let a = RealVector::new(prefix[..n].iter().map(|p| -p).collect())?;
    let b = RealVector::new((0..n).map(|j| prefix[n - j]).collect())?;

    let (coefficients, errors, exact) = if v.is_integral() {
        let opts = MaxConvOptions {
            t_star: t,
            ..Default::default()
        };
        let r = maxconv_l(&a, &b, &opts)?;
        let errors = vec![0.0; r.coefficients.len()];
        (r.coefficients, errors, r.certified)
    } else {
        let t = t.unwrap_or(DEFAULT_MCSP_LOG_T.exp());
        let opts = MaxConvOptions {
            t_star: Some(t),
            ..Default::default()
        };
        let r = maxconv_float(&a, &b, Algorithm::LogSumExp, &opts)?;
        let ln_t = t.ln();
        let errors = r
            .raw_errors
            .iter()
            .enumerate()
            .map(|(m, e)| {
                let terms = (m.min(2 * n - 2 - m) + 1) as f64;
                e + terms.ln() / ln_t
            })
            .collect();
        (r.coefficients, errors, false)
    };
    Ok(Mcsp {
        sums: (1..=n).map(|len| coefficients[n - len]).collect(),
        errors: (1..=n).map(|len| errors[n - len]).collect(),
        exact,
    })
}
