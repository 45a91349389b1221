//! Convergence bounds for the smooth maxima and the certified integer
//! recoveries they make possible.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::approx::{ApproxResult, Weights};
use crate::error::{Error, Result};
use crate::vector::RealVector;

/// Inputs shared by the four bound computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRequest {
    pub n: usize,
    /// Multiplicity of the maximum.
    pub mu_max: usize,
    /// Lower bound on the gap between the two largest distinct values
    /// (1 for integer input).
    pub g2: f64,
    pub delta: f64,
    pub alpha: Option<f64>,
    /// Upper estimate of the maximum, needed only by the p-norm bound.
    pub m_upper: Option<f64>,
}

impl BoundRequest {
    pub fn new(n: usize, mu_max: usize, g2: f64, delta: f64) -> Self {
        BoundRequest {
            n,
            mu_max,
            g2,
            delta,
            alpha: None,
            m_upper: None,
        }
    }

    /// Integer input with target error 1.
    pub fn integral(n: usize, mu_max: usize) -> Self {
        Self::new(n, mu_max, 1.0, 1.0)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_m_upper(mut self, m_upper: f64) -> Self {
        self.m_upper = Some(m_upper);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if self.mu_max == 0 || self.mu_max > self.n {
            return Err(Error::param(
                "mu_max",
                format!("must lie in 1..={}, got {}", self.n, self.mu_max),
            ));
        }
        if !(self.g2 > 0.0) || !self.g2.is_finite() {
            return Err(Error::param(
                "g2",
                format!("must be finite and > 0, got {}", self.g2),
            ));
        }
        if !(self.delta > 0.0) || self.delta.is_nan() {
            return Err(Error::param(
                "delta",
                format!("must be > 0, got {}", self.delta),
            ));
        }
        Ok(())
    }

    /// Integer input with δ = 1, where the closed-form shortcuts apply.
    fn integral_shortcut(&self) -> bool {
        self.g2 >= 1.0 && self.delta == 1.0
    }

    fn rest(&self) -> f64 {
        (self.n - self.mu_max) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    LogSumExp,
    Ratio,
    Difference,
    PNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    /// Every `t > t_min` meets the target. For [`Theorem::PNorm`] this is the
    /// exponent `u_min` rather than a base.
    pub t_min: f64,
    pub theorem: Theorem,
    pub closed_form: bool,
}

impl BoundResult {
    pub fn admits(&self, t: f64) -> bool {
        t > self.t_min
    }
}

/// Smallest `u >= 0` (to 1e-9) with `slope·u > ln(μ + (n-μ)e^{-g2·u})`.
/// The left side minus the right is strictly increasing, so the root is
/// unique; the returned point always satisfies the strict inequality.
fn power_sum_root(slope: f64, mu: f64, rest: f64, g2: f64) -> f64 {
    let h = |u: f64| slope * u - (mu + rest * (-g2 * u).exp()).ln();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn strict(t: f64) -> f64 {
    t.max(1.0).next_up()
}

/// Least `t` with `t^{δ+g2} - μ t^{g2} - (n-μ) > 0`, which forces
/// `0 <= L_v(t) - max(v) < δ`.
pub fn bound_l(req: &BoundRequest) -> Result<BoundResult> {
    req.validate()?;
    let mu = req.mu_max as f64;
    if req.integral_shortcut() {
        let t = (mu + (mu * mu + 4.0 * req.rest()).sqrt()) / 2.0;
        return Ok(BoundResult {
            t_min: strict(t),
            theorem: Theorem::LogSumExp,
            closed_form: true,
        });
    }
    let u = power_sum_root(req.delta, mu, req.rest(), req.g2);
    Ok(BoundResult {
        t_min: strict(u.exp()),
        theorem: Theorem::LogSumExp,
        closed_form: false,
    })
}

/// Threshold beyond which `0 <= max(v) - R_v(t) < δ`.
pub fn bound_r(req: &BoundRequest) -> Result<BoundResult> {
    req.validate()?;
    let mu = req.mu_max as f64;
    if req.integral_shortcut() {
        return Ok(BoundResult {
            t_min: strict(std::f64::consts::E.max(req.rest() / mu)),
            theorem: Theorem::Ratio,
            closed_form: true,
        });
    }
    let analytic = (1.0 / req.g2).exp();
    let tail = (req.rest() * req.g2 / (req.delta * mu)).powf(1.0 / req.g2);
    Ok(BoundResult {
        t_min: strict(analytic.max(tail)),
        theorem: Theorem::Ratio,
        closed_form: false,
    })
}

/// Threshold beyond which `0 <= max(v) - D_v(t, α) < δ`; needs `α > 1`.
pub fn bound_d(req: &BoundRequest) -> Result<BoundResult> {
    req.validate()?;
    let alpha = req
        .alpha
        .ok_or_else(|| Error::param("alpha", "the D bound needs alpha"))?;
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::param(
            "alpha",
            format!("must be finite and > 1, got {alpha}"),
        ));
    }
    let mu = req.mu_max as f64;
    if req.integral_shortcut() {
        return Ok(BoundResult {
            t_min: strict(std::f64::consts::E.max(req.rest() / mu)),
            theorem: Theorem::Difference,
            closed_form: true,
        });
    }
    let g2 = req.g2;
    let decay = alpha.powf(-g2);
    let analytic = (1.0 / g2).exp();
    let peak = alpha.powf(decay / (1.0 - decay));
    let tail = (req.rest() / (req.delta * mu) * (1.0 - decay) / alpha.ln()).powf(1.0 / g2);
    Ok(BoundResult {
        t_min: strict(analytic.max(peak).max(tail)),
        theorem: Theorem::Difference,
        closed_form: false,
    })
}

/// Least exponent `u > 1` with `e^{u(Δ+g2)} - e^{u g2} μ - (n-μ) > 0`,
/// `Δ = ln(1 + δ/M_upper)`, for entries in `[0, 1]`. The bound depends on the
/// unknown maximum, so the caller supplies an upper estimate `M_upper`.
pub fn bound_pnorm(req: &BoundRequest) -> Result<BoundResult> {
    req.validate()?;
    let m_upper = req
        .m_upper
        .ok_or_else(|| Error::param("m_upper", "the p-norm bound needs an upper estimate of M"))?;
    if !(m_upper > 0.0) || !m_upper.is_finite() {
        return Err(Error::param(
            "m_upper",
            format!("must be finite and > 0, got {m_upper}"),
        ));
    }
    let margin = (1.0 + req.delta / m_upper).ln();
    let u = if margin.is_infinite() {
        0.0
    } else {
        power_sum_root(margin, req.mu_max as f64, req.rest(), req.g2)
    };
    Ok(BoundResult {
        t_min: strict(u),
        theorem: Theorem::PNorm,
        closed_form: false,
    })
}

/// Marks `result` certified when `bound` admits its evaluation point.
pub fn certify(mut result: ApproxResult, bound: &BoundResult, delta: f64) -> ApproxResult {
    result.certified = bound.admits(result.t);
    result.target_delta = Some(delta);
    result
}

/// Shifted power sum `Σ (n+1)^{v_i - M}` for integral `v`, together with `M`.
fn shifted_sum_at_n_plus_one(v: &RealVector) -> Result<(i64, f64, f64)> {
    let ints = v.to_i64()?;
    let top = *ints.iter().max().expect("nonempty");
    let u = ((v.len() + 1) as f64).ln();
    let w = Weights::new(v.entries(), u);
    if !w.sum.is_finite() {
        return Err(Error::RangeLimit("shifted power sum is not finite".into()));
    }
    Ok((top, w.sum, u))
}

/// `⌊L_v(n+1)⌋`, which equals `max(v)` for every integral `v`.
pub fn certified_max(v: &RealVector) -> Result<i64> {
    let (top, sum, u) = shifted_sum_at_n_plus_one(v)?;
    // L = top + ln(sum)/u; the fractional part is added in integer arithmetic
    // so large entries keep full precision.
    let frac = (sum.ln() / u).floor() as i64;
    Ok(top + frac)
}

/// `(M, μ_M)` from `M = ⌊L_v(t)⌋` and `μ_M = ⌊t^{L_v(t) - M}⌋` at `t = n + 1`.
pub fn certified_multiplicity(v: &RealVector) -> Result<(i64, usize)> {
    let (top, sum, u) = shifted_sum_at_n_plus_one(v)?;
    let max = top + (sum.ln() / u).floor() as i64;
    // t^{L - M} = Σ t^{v_i - M}
    let scale = ((top - max) as f64 * u).exp();
    Ok((max, (sum * scale).floor() as usize))
}

const DEGENERACY_GUARD: f64 = 1e-12;

fn first_three_cumulants(v: &RealVector, t: f64) -> Result<[f64; 3]> {
    if v.max() == v.min() {
        return Err(Error::Degenerate(
            "all entries are equal, there is no second value".into(),
        ));
    }
    let k = crate::approx::log_derivatives(v, t, 3)?;
    Ok([k[0], k[1], k[2]])
}

/// `(2R¹R³ - R²(R¹ + R²)) / (R¹ - 3R² + 2R³)`, which converges to `max(v)` one
/// order faster than `R¹`.
///
/// In terms of cumulants `κ` of `u ↦ 𝓛_v(e^u)` the numerator is
/// `κ₁κ₃ - κ₂²` and the denominator is `κ₃`; evaluating it that way avoids
/// cancelling nearly equal `R^{(k)}` values.
pub fn combined_max(v: &RealVector, t: f64) -> Result<f64> {
    let [k1, k2, k3] = first_three_cumulants(v, t)?;
    let num = k1 * k3 - k2 * k2;
    if !(k3.abs() > DEGENERACY_GUARD * num.abs()) {
        return Err(Error::Degenerate(format!(
            "denominator {k3:e} is negligible against numerator {num:e}"
        )));
    }
    Ok(k1 - k2 * k2 / k3)
}

/// `(R¹ - 3R² + 2R³) / (R² - R¹) = -κ₃/κ₂`, converging to the gap `g₂`.
pub fn combined_g2(v: &RealVector, t: f64) -> Result<f64> {
    let [_, k2, k3] = first_three_cumulants(v, t)?;
    if !(k2.abs() > DEGENERACY_GUARD * k3.abs()) {
        return Err(Error::Degenerate(format!(
            "denominator {k2:e} is negligible against numerator {k3:e}"
        )));
    }
    Ok(-k3 / k2)
}

/// Second-largest distinct value of an integral vector, `M - round(g₂)`.
///
/// `M` is certified; the gap is a best-effort estimate. `t` doubles from
/// `max(e, n)` until two consecutive gap estimates sit within 1/4 of the same
/// positive integer.
pub fn second_value(v: &RealVector) -> Result<i64> {
    let max = certified_max(v)?;
    let mut t = std::f64::consts::E.max(v.len() as f64);
    let near_int = |g: f64| (g.round() >= 1.0 && (g - g.round()).abs() < 0.25).then(|| g.round());
    let mut previous: Option<f64> = None;
    // Past u ≈ 745 every non-maximal weight underflows.
    while t.ln() < 745.0 {
        let g = combined_g2(v, t)?;
        let now = near_int(g);
        if let Some(gap) = now.filter(|_| now == previous) {
            return Ok(max - gap as i64);
        }
        previous = now;
        t *= 2.0;
    }
    Err(Error::NoStabilization { last_t: t })
}

/// The `r × r` lower-triangular matrix taking `(𝒟^{(1)}, …, 𝒟^{(r)})` to
/// `(R^{(1)}, …, R^{(r)})`. Entry `(i, j)` is `(-1)^{i+1}/(i-1)! · s(i, j)`.
pub fn stirling_matrix(r: usize) -> Vec<Vec<BigRational>> {
    // s(i, j) as integers; poly holds the coefficients of x(x-1)…(x-i+1).
    let mut poly: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    let mut factorial = BigInt::one();
    let mut rows = Vec::with_capacity(r);
    for i in 1..=r {
        if i > 1 {
            let mut next = vec![BigInt::zero(); poly.len() + 1];
            for (j, c) in poly.iter().enumerate() {
                next[j + 1] += c;
                next[j] -= c * BigInt::from(i - 1);
            }
            poly = next;
            factorial *= BigInt::from(i - 1);
        }
        let sign = if i % 2 == 1 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        let row = (1..=r)
            .map(|j| {
                if j <= i {
                    BigRational::new(&sign * &poly[j], factorial.clone())
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        rows.push(row);
    }
    rows
}
