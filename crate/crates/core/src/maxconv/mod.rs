//! Max- and min-plus convolution through ordinary convolution of powers.
//!
//! `c_k = max_{i+j=k} (a_i + b_j)` is recovered from
//! `ℓ_k(t) = Σ_{i+j=k} t^{a_i + b_j}`, either as `⌊log_t ℓ_k⌋` (LogSumExp) or
//! as `⌈log_α(ℓ_k(αt)/ℓ_k(t))⌉` (difference quotient). Every output comes with
//! an interval argument: the true `c_k` lies in a computable window around
//! the pre-rounding value, and a coefficient is certified when that window
//! holds a single integer.

mod banded;
mod exact;
mod fft;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::vector::RealVector;
use exact::{ceil_log_ratio, Dyadic, ExactPowerConv};
use fft::UNIT_ROUNDOFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    FftFloat,
    ExactInt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Floor,
    Ceil,
    Nearest,
}

impl Rounding {
    fn flipped(self) -> Rounding {
        match self {
            Rounding::Floor => Rounding::Ceil,
            Rounding::Ceil => Rounding::Floor,
            Rounding::Nearest => Rounding::Nearest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// `⌊log_t ℓ(t)⌋`
    LogSumExp,
    /// `⌈log_α(ℓ(αt)/ℓ(t))⌉`
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvolutionPlan {
    pub backend: Backend,
    pub t_star: f64,
    pub alpha_star: Option<f64>,
    /// `None` for real-valued output.
    pub rounding: Option<Rounding>,
    /// Absolute per-coefficient error of the floating transform, in the
    /// (band-scaled) power-sum domain; zero for the exact backend.
    pub fft_error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxConvResult {
    /// Length `len(a) + len(b) - 1`. Integer valued unless produced by
    /// [`maxconv_float`] or [`minconv_float`].
    pub coefficients: Vec<f64>,
    /// True when every coefficient is proven equal to the exact
    /// max-convolution.
    pub certified: bool,
    pub plan: ConvolutionPlan,
    /// Values before rounding.
    pub raw_logs: Vec<f64>,
    /// Bound on the numerical error of each raw value.
    pub raw_errors: Vec<f64>,
}

impl MaxConvResult {
    /// Coefficients as integers; only meaningful for integral pipelines.
    pub fn integers(&self) -> Vec<i64> {
        self.coefficients.iter().map(|&c| c as i64).collect()
    }

    fn negated(mut self) -> Self {
        for c in self.coefficients.iter_mut().chain(self.raw_logs.iter_mut()) {
            *c = if *c == 0.0 { 0.0 } else { -*c };
        }
        self.plan.rounding = self.plan.rounding.map(Rounding::flipped);
        self
    }
}

/// Knobs for the max-convolution pipelines; everything has a default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MaxConvOptions {
    pub t_star: Option<f64>,
    pub alpha_star: Option<f64>,
    /// `None` runs the floating path and falls back to the exact one when
    /// rounding cannot be certified.
    pub backend: Option<Backend>,
    pub rounding: Option<Rounding>,
}

/// Result of [`conv`]. `exact` is filled only by the exact backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Convolution {
    pub values: Vec<f64>,
    pub exact: Option<Vec<BigInt>>,
    pub error_bound: f64,
}

/// Classical convolution `(x ⋆ y)_k = Σ_i x_i y_{k-i}`.
pub fn conv(x: &RealVector, y: &RealVector, backend: Backend) -> Result<Convolution> {
    match backend {
        Backend::FftFloat => {
            let (values, error_bound) = fft::convolve(x.entries(), y.entries())?;
            Ok(Convolution {
                values,
                exact: None,
                error_bound,
            })
        }
        Backend::ExactInt => {
            let big = |v: &RealVector| -> Result<Vec<BigInt>> {
                Ok(v.to_i64()?.into_iter().map(BigInt::from).collect())
            };
            let exact = exact::convolve_signed(&big(x)?, &big(y)?);
            Ok(Convolution {
                values: exact
                    .iter()
                    .map(|c| c.to_f64().unwrap_or(f64::NAN))
                    .collect(),
                exact: Some(exact),
                error_bound: 0.0,
            })
        }
    }
}

/// Exact power sums `ℓ_k(t) = Σ_{i+j=k} t^{a_i + b_j}` of integral vectors.
pub fn power_sums(a: &RealVector, b: &RealVector, t: f64) -> Result<Vec<BigRational>> {
    check_base("t", t)?;
    exact::power_sums(&a.to_i64()?, &b.to_i64()?, t)
}

/// O(len(a)·len(b)) max-plus convolution, the reference the fast paths are
/// tested against.
pub fn maxconv_naive(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].max(x + y);
        }
    }
    out
}

pub fn minconv_naive(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].min(x + y);
        }
    }
    out
}

fn check_base(name: &'static str, t: f64) -> Result<()> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::param(
            name,
            format!("must be a finite value > 1, got {t}"),
        ));
    }
    Ok(())
}

/// Number of pairs `(i, j)` with `i + j = k`.
fn terms(k: usize, la: usize, lb: usize) -> usize {
    let lo = k.saturating_sub(lb - 1);
    let hi = k.min(la - 1);
    hi - lo + 1
}

/// `max_{g >= 1} g·s^{-g}`, the largest possible contribution of one
/// non-maximal entry to `max - R(s)`.
fn ratio_tail(s: f64) -> f64 {
    if s >= std::f64::consts::E {
        1.0 / s
    } else {
        1.0 / (std::f64::consts::E * s.ln())
    }
}

fn default_t(algorithm: Algorithm, la: usize, lb: usize) -> f64 {
    match algorithm {
        Algorithm::LogSumExp => la.max(lb) as f64 + 1.0,
        Algorithm::Difference => {
            let base = std::f64::consts::E.max((la.max(lb) - 1) as f64);
            base * (1.0 + 1e-6)
        }
    }
}

const DEFAULT_ALPHA: f64 = 2.0;

/// Shifted exponents `(v_i - max v)·u`.
fn exponents(v: &[i64], u: f64) -> Vec<f64> {
    let top = *v.iter().max().unwrap();
    v.iter().map(|&x| (x - top) as f64 * u).collect()
}

fn real_exponents(v: &[f64], u: f64) -> Vec<f64> {
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    v.iter().map(|&x| (x - top) * u).collect()
}

/// Raw values and their numerical error from the floating path.
struct FloatRaw {
    values: Vec<f64>,
    errors: Vec<f64>,
    fft_error: f64,
}

fn float_raw(
    xa: impl Fn(f64) -> Vec<f64>,
    xb: impl Fn(f64) -> Vec<f64>,
    offset: f64,
    u: f64,
    alpha: Option<f64>,
) -> Result<FloatRaw> {
    let near = banded::log_convolution(&xa(u), &xb(u))?;
    let (values, errors, fft_error) = match alpha {
        None => {
            let values: Vec<f64> = near.ln_values.iter().map(|l| offset + l / u).collect();
            let errors = near
                .ln_errors
                .iter()
                .zip(&values)
                .map(|(e, v)| e / u + 4.0 * UNIT_ROUNDOFF * (1.0 + v.abs()))
                .collect();
            (values, errors, near.fft_error)
        }
        Some(alpha) => {
            let la = alpha.ln();
            let far = banded::log_convolution(&xa(u + la), &xb(u + la))?;
            let values: Vec<f64> = near
                .ln_values
                .iter()
                .zip(&far.ln_values)
                .map(|(n, f)| offset + (f - n) / la)
                .collect();
            let errors = near
                .ln_errors
                .iter()
                .zip(&far.ln_errors)
                .zip(&values)
                .map(|((en, ef), v)| (en + ef) / la + 4.0 * UNIT_ROUNDOFF * (1.0 + v.abs()))
                .collect();
            (values, errors, near.fft_error.max(far.fft_error))
        }
    };
    Ok(FloatRaw {
        values,
        errors,
        fft_error,
    })
}

/// Max-convolution of integral vectors by the chosen algorithm.
pub fn maxconv(
    a: &RealVector,
    b: &RealVector,
    algorithm: Algorithm,
    opts: &MaxConvOptions,
) -> Result<MaxConvResult> {
    let ai = a.to_i64()?;
    let bi = b.to_i64()?;
    let (la, lb) = (ai.len(), bi.len());
    let t = opts.t_star.unwrap_or_else(|| default_t(algorithm, la, lb));
    check_base("t_star", t)?;
    let alpha = match algorithm {
        Algorithm::LogSumExp => None,
        Algorithm::Difference => {
            let alpha = opts.alpha_star.unwrap_or(DEFAULT_ALPHA);
            check_base("alpha_star", alpha)?;
            Some(alpha)
        }
    };
    let rounding = opts.rounding.unwrap_or(match algorithm {
        Algorithm::LogSumExp => Rounding::Floor,
        Algorithm::Difference => Rounding::Ceil,
    });
    match (algorithm, rounding) {
        (Algorithm::LogSumExp, Rounding::Ceil) | (Algorithm::Difference, Rounding::Floor) => {
            return Err(Error::param(
                "rounding",
                "must round toward the side the estimate approaches from, or to nearest",
            ))
        }
        _ => {}
    }
    let offset = (ai.iter().max().unwrap() + bi.iter().max().unwrap()) as f64;
    let u = t.ln();
    // Width of the window that must contain the true coefficient.
    let slack: Vec<f64> = (0..la + lb - 1)
        .map(|k| {
            let n = terms(k, la, lb) as f64;
            match algorithm {
                Algorithm::LogSumExp => n.ln() / u,
                Algorithm::Difference => (n - 1.0) * ratio_tail(t),
            }
        })
        .collect();
    let window = |r: f64, e: f64, w: f64| -> (f64, f64) {
        match algorithm {
            // max ∈ [L - w, L]
            Algorithm::LogSumExp => ((r - e - w).ceil(), (r + e).floor()),
            // max ∈ [D, D + w]
            Algorithm::Difference => ((r - e).ceil(), (r + e + w).floor()),
        }
    };
    let round = |r: f64, w: f64| -> f64 {
        match (algorithm, rounding) {
            (_, Rounding::Floor) => r.floor(),
            (_, Rounding::Ceil) => r.ceil(),
            (Algorithm::LogSumExp, Rounding::Nearest) => (r - w / 2.0).round(),
            (Algorithm::Difference, Rounding::Nearest) => (r + w / 2.0).round(),
        }
    };
    let plan = |backend, fft_error_bound| ConvolutionPlan {
        backend,
        t_star: t,
        alpha_star: alpha,
        rounding: Some(rounding),
        fft_error_bound,
    };

    if opts.backend != Some(Backend::ExactInt) {
        let raw = float_raw(
            |u| exponents(&ai, u),
            |u| exponents(&bi, u),
            offset,
            u,
            alpha,
        )?;
        let mut certified = true;
        let coefficients: Vec<f64> = raw
            .values
            .iter()
            .zip(&raw.errors)
            .zip(&slack)
            .map(|((&r, &e), &w)| {
                let (lo, hi) = window(r, e, w);
                if lo == hi {
                    lo
                } else {
                    certified = false;
                    round(r, w)
                }
            })
            .collect();
        let bound_met = slack.iter().all(|&w| w < 1.0);
        if certified || opts.backend == Some(Backend::FftFloat) || !bound_met {
            return Ok(MaxConvResult {
                coefficients,
                certified,
                plan: plan(Backend::FftFloat, raw.fft_error),
                raw_logs: raw.values,
                raw_errors: raw.errors,
            });
        }
    }

    let base = Dyadic::from_f64(t);
    let near = ExactPowerConv::new(&ai, &bi, &base)?;
    let ln_t = near_ln(&base);
    let (raw_logs, exact_values): (Vec<f64>, Vec<i64>) = match alpha {
        None => (0..la + lb - 1)
            .map(|k| {
                let r = offset + near.ln_value(k) / ln_t;
                let f = near.floor_log(k, (r - offset).floor() as i64);
                (r, offset as i64 + f)
            })
            .unzip(),
        Some(alpha) => {
            let alpha_d = Dyadic::from_f64(alpha);
            let far = ExactPowerConv::new(&ai, &bi, &base.mul(&alpha_d))?;
            let ln_alpha = near_ln(&alpha_d);
            (0..la + lb - 1)
                .map(|k| {
                    let r = offset + (far.ln_value(k) - near.ln_value(k)) / ln_alpha;
                    let c = ceil_log_ratio(&alpha_d, &near, &far, k, (r - offset).ceil() as i64);
                    (r, offset as i64 + c)
                })
                .unzip()
        }
    };
    // The exact rounding is exact; only the window edge uses the double.
    let edge_error: Vec<f64> = raw_logs.iter().map(|r| 1e-9 * (1.0 + r.abs())).collect();
    let mut certified = true;
    let coefficients = exact_values
        .iter()
        .zip(&raw_logs)
        .zip(&edge_error)
        .zip(&slack)
        .map(|(((&c, &r), &e), &w)| {
            let c = c as f64;
            let other = match algorithm {
                Algorithm::LogSumExp => (r - e - w).ceil(),
                Algorithm::Difference => (r + e + w).floor(),
            };
            if other == c {
                c
            } else {
                certified = false;
                match rounding {
                    Rounding::Nearest => round(r, w),
                    _ => c,
                }
            }
        })
        .collect();
    Ok(MaxConvResult {
        coefficients,
        certified,
        plan: plan(Backend::ExactInt, 0.0),
        raw_logs,
        raw_errors: edge_error,
    })
}

/// `ln(p/q)` of a dyadic, accurate for huge numerators.
fn near_ln(d: &Dyadic) -> f64 {
    exact::big_ln(&d.num) - exact::big_ln(&d.den)
}

/// LogSumExp recovery: `c_k = ⌊log_{t*} ℓ_k(t*)⌋`. Default `t* = max(len a, len b) + 1`.
pub fn maxconv_l(a: &RealVector, b: &RealVector, opts: &MaxConvOptions) -> Result<MaxConvResult> {
    maxconv(a, b, Algorithm::LogSumExp, opts)
}

/// Difference recovery: `c_k = ⌈log_{α*}(ℓ_k(α*t*)/ℓ_k(t*))⌉`. Defaults
/// `t* = max(e, len a - 1, len b - 1)` (nudged up) and `α* = 2`.
pub fn maxconv_d(a: &RealVector, b: &RealVector, opts: &MaxConvOptions) -> Result<MaxConvResult> {
    maxconv(a, b, Algorithm::Difference, opts)
}

/// Min-plus convolution, `-maxconv(-a, -b)`.
pub fn minconv(
    a: &RealVector,
    b: &RealVector,
    algorithm: Algorithm,
    opts: &MaxConvOptions,
) -> Result<MaxConvResult> {
    let opts = MaxConvOptions {
        rounding: opts.rounding.map(Rounding::flipped),
        ..*opts
    };
    Ok(maxconv(&a.negated(), &b.negated(), algorithm, &opts)?.negated())
}

/// Real-valued max-convolution estimate at `opts.t_star` (required), without
/// rounding. LogSumExp values sit above the true coefficients, difference
/// quotients below, in both cases up to `raw_errors`.
pub fn maxconv_float(
    a: &RealVector,
    b: &RealVector,
    algorithm: Algorithm,
    opts: &MaxConvOptions,
) -> Result<MaxConvResult> {
    let t = opts
        .t_star
        .ok_or_else(|| Error::param("t_star", "the real-valued pipeline needs an explicit t"))?;
    check_base("t_star", t)?;
    let alpha = match algorithm {
        Algorithm::LogSumExp => None,
        Algorithm::Difference => {
            let alpha = opts.alpha_star.unwrap_or(DEFAULT_ALPHA);
            check_base("alpha_star", alpha)?;
            Some(alpha)
        }
    };
    let offset = a.max() + b.max();
    let raw = float_raw(
        |u| real_exponents(a.entries(), u),
        |u| real_exponents(b.entries(), u),
        offset,
        t.ln(),
        alpha,
    )?;
    Ok(MaxConvResult {
        coefficients: raw.values.clone(),
        certified: false,
        plan: ConvolutionPlan {
            backend: Backend::FftFloat,
            t_star: t,
            alpha_star: alpha,
            rounding: None,
            fft_error_bound: raw.fft_error,
        },
        raw_logs: raw.values,
        raw_errors: raw.errors,
    })
}

/// Real-valued min-plus estimate, `-maxconv_float(-a, -b)`. Here `t_star` is
/// the base of the max-direction pipeline, i.e. the reciprocal of the
/// `t → 0⁺` parameter.
pub fn minconv_float(
    a: &RealVector,
    b: &RealVector,
    algorithm: Algorithm,
    opts: &MaxConvOptions,
) -> Result<MaxConvResult> {
    Ok(maxconv_float(&a.negated(), &b.negated(), algorithm, opts)?.negated())
}
