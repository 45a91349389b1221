//! Smooth approximations of `max(v)`.
//!
//! Everything is evaluated in the `u = ln t` domain with exponentials shifted
//! by the dominant entry, so the power sum `F_v(t) = Σ t^{v_i}` is never formed
//! directly. The weights `ω_i = exp((v_i - anchor)·u)` all lie in `(0, 1]` and
//! at least one equals 1, which keeps every intermediate finite for any finite
//! `u`.

mod contour;

pub use contour::{contour_max, ContourParams};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vector::RealVector;

/// Highest derivative order accepted by [`eval_rk`].
pub const MAX_ORDER: usize = 8;

/// Which approximation produced an [`ApproxResult`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    LogSumExp,
    Ratio,
    HigherRatio { k: usize },
    Difference { alpha: f64 },
    PNorm { p: f64 },
    Contour { k: usize, radius: f64, nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxResult {
    pub value: f64,
    pub method: Method,
    /// Evaluation point `t` (the exponent `p` for p-norms).
    pub t: f64,
    /// Set only after a convergence bound was checked against `t`.
    pub certified: bool,
    pub target_delta: Option<f64>,
}

impl ApproxResult {
    fn new(value: f64, method: Method, t: f64) -> Self {
        ApproxResult {
            value,
            method,
            t,
            certified: false,
            target_delta: None,
        }
    }
}

/// Shifted weights of `v` at `u`.
#[derive(Debug, Clone)]
pub(crate) struct Weights {
    /// The entry maximising `v_i·u`; deviations are measured from it.
    pub anchor: f64,
    pub weights: Vec<f64>,
    pub sum: f64,
}

impl Weights {
    pub fn new(v: &[f64], u: f64) -> Self {
        let anchor = if u >= 0.0 {
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        } else {
            v.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let weights: Vec<f64> = v.iter().map(|&x| ((x - anchor) * u).exp()).collect();
        let sum = weights.iter().sum();
        Weights {
            anchor,
            weights,
            sum,
        }
    }

    /// `𝓛_v(e^u) - anchor·u`
    pub fn log_sum(&self) -> f64 {
        self.sum.ln()
    }

    /// Cumulants `κ_1..=κ_order` of the distribution with atoms `v` and
    /// normalised weights. These are the u-derivatives of `𝓛_v(e^u)`.
    pub fn cumulants(&self, v: &[f64], order: usize) -> Vec<f64> {
        // Raw moments of the deviations from the anchor. Entries equal to the
        // anchor contribute exact zeros, so constant vectors give exact zero
        // cumulants beyond the first.
        let mut moments = vec![0.0; order + 1];
        for (&x, &w) in v.iter().zip(&self.weights) {
            let d = x - self.anchor;
            let mut p = w;
            for m in moments.iter_mut().skip(1) {
                p *= d;
                *m += p;
            }
        }
        for m in moments.iter_mut().skip(1) {
            *m /= self.sum;
        }
        let mut kappa = moments_to_cumulants(&moments[1..]);
        if let Some(k1) = kappa.first_mut() {
            *k1 += self.anchor;
        }
        kappa
    }
}

/// Cumulants from raw moments `m_1..=m_n` via
/// `κ_n = m_n - Σ_{j<n} C(n-1, j-1) κ_j m_{n-j}`.
pub(crate) fn moments_to_cumulants(moments: &[f64]) -> Vec<f64> {
    let n = moments.len();
    let mut kappa = vec![0.0; n];
    for i in 1..=n {
        let mut acc = moments[i - 1];
        let mut binom = 1.0; // C(i-1, j-1) starting at j = 1
        for j in 1..i {
            acc -= binom * kappa[j - 1] * moments[i - j - 1];
            binom = binom * (i - j) as f64 / j as f64;
        }
        kappa[i - 1] = acc;
    }
    kappa
}

/// Row `k` of the change of basis from `(𝒟^{(1)}, …, 𝒟^{(k)})` to `R^{(k)}`:
/// `(-1)^{k+1}/(k-1)! · s(k, j)` with signed Stirling numbers of the first kind.
pub(crate) fn ratio_row(k: usize) -> Vec<f64> {
    // Coefficients of the falling factorial x(x-1)…(x-k+1).
    let mut poly = vec![0.0, 1.0];
    for i in 1..k {
        let mut next = vec![0.0; poly.len() + 1];
        for (j, &c) in poly.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= i as f64 * c;
        }
        poly = next;
    }
    let factorial: f64 = (1..k).map(|i| i as f64).product();
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    poly[1..].iter().map(|c| sign * c / factorial).collect()
}

fn check_t(t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::param(
            "t",
            format!("must be a finite value > 1, got {t}"),
        ));
    }
    Ok(t.ln())
}

/// `𝓛_v(e^u) = ln Σ exp(v_i·u)`, evaluated as `anchor·u + ln Σ exp((v_i - anchor)·u)`.
///
/// Defined for every finite `u`; for `u < 0` the anchor is the minimum, which
/// is the reflection `𝓛_v(e^u) = 𝓛_{-v}(e^{-u})`.
pub fn eval_lcal(v: &RealVector, u: f64) -> f64 {
    let w = Weights::new(v.entries(), u);
    w.anchor * u + w.log_sum()
}

/// LogSumExp approximation `L_v(t) = log_t Σ t^{v_i}`; never below `max(v)`.
pub fn eval_l(v: &RealVector, t: f64) -> Result<ApproxResult> {
    let u = check_t(t)?;
    let w = Weights::new(v.entries(), u);
    Ok(ApproxResult::new(
        w.anchor + w.log_sum() / u,
        Method::LogSumExp,
        t,
    ))
}

/// Ratio approximation `R_v(t) = t F'(t) / F(t)`, the softmax-weighted mean.
pub fn eval_r(v: &RealVector, t: f64) -> Result<ApproxResult> {
    let u = check_t(t)?;
    Ok(ApproxResult::new(ratio_at(v, u), Method::Ratio, t))
}

/// Weighted mean at an arbitrary `u`; tends to the minimum as `u → -∞`.
pub(crate) fn ratio_at(v: &RealVector, u: f64) -> f64 {
    let w = Weights::new(v.entries(), u);
    let shift: f64 = v
        .entries()
        .iter()
        .zip(&w.weights)
        .map(|(&x, &om)| (x - w.anchor) * om)
        .sum();
    w.anchor + shift / w.sum
}

/// Cumulants `𝒟^{(1)}..=𝒟^{(order)}` of `u ↦ 𝓛_v(e^u)` at `u = ln t`.
pub fn log_derivatives(v: &RealVector, t: f64, order: usize) -> Result<Vec<f64>> {
    let u = check_t(t)?;
    Ok(Weights::new(v.entries(), u).cumulants(v.entries(), order))
}

/// Higher-order ratio `R_v^{(k)}(t) = -(-t)^k/(k-1)! · d^k/dt^k 𝓛_v(t)`.
pub fn eval_rk(v: &RealVector, t: f64, k: usize) -> Result<ApproxResult> {
    if k == 0 {
        return Err(Error::param("k", "derivative order must be at least 1"));
    }
    if k > MAX_ORDER {
        return Err(Error::OrderLimit {
            k,
            limit: MAX_ORDER,
        });
    }
    let kappa = log_derivatives(v, t, k)?;
    let value = if k == 1 {
        kappa[0]
    } else {
        ratio_row(k).iter().zip(&kappa).map(|(a, d)| a * d).sum()
    };
    Ok(ApproxResult::new(value, Method::HigherRatio { k }, t))
}

/// Finite-difference surrogate `D_v(t, α) = log_α(F_v(αt) / F_v(t))`.
pub fn eval_d(v: &RealVector, t: f64, alpha: f64) -> Result<ApproxResult> {
    let u = check_t(t)?;
    if !(alpha > 0.0) || !alpha.is_finite() || alpha == 1.0 {
        return Err(Error::param(
            "alpha",
            format!("must be positive, finite and != 1, got {alpha}"),
        ));
    }
    let log_alpha = alpha.ln();
    let near = Weights::new(v.entries(), u);
    let far = Weights::new(v.entries(), u + log_alpha);
    // The anchors differ only when αt drops below 1.
    let value = if far.anchor == near.anchor {
        near.anchor + (far.log_sum() - near.log_sum()) / log_alpha
    } else {
        (far.anchor * (u + log_alpha) - near.anchor * u + far.log_sum() - near.log_sum())
            / log_alpha
    };
    Ok(ApproxResult::new(value, Method::Difference { alpha }, t))
}

/// `‖v‖_p = (Σ v_i^p)^{1/p}` for nonnegative `v`; zero entries contribute nothing.
pub fn eval_pnorm(v: &RealVector, p: f64) -> Result<ApproxResult> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::param(
            "p",
            format!("must be finite and > 0, got {p}"),
        ));
    }
    if let Some((index, &value)) = v.entries().iter().enumerate().find(|(_, x)| **x < 0.0) {
        return Err(Error::NegativeEntry { index, value });
    }
    let top = v.max();
    if top == 0.0 {
        return Ok(ApproxResult::new(0.0, Method::PNorm { p }, p));
    }
    let log_top = top.ln();
    let sum: f64 = v
        .entries()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| (p * (x.ln() - log_top)).exp())
        .sum();
    Ok(ApproxResult::new(
        top * (sum.ln() / p).exp(),
        Method::PNorm { p },
        p,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_of(xs: &[f64]) -> RealVector {
        RealVector::new(xs.to_vec()).unwrap()
    }

    fn v1() -> RealVector {
        RealVector::from_ints(1..=7).unwrap()
    }

    fn v2() -> RealVector {
        RealVector::from_ints([1, 2, 3, 4, 5, 6, 7, 7, 7, 7, 7]).unwrap()
    }

    #[test]
    fn lcal_closed_forms() {
        assert_eq!(eval_lcal(&vec_of(&[0.0]), 3.7), 0.0);
        let c = vec_of(&[2.5; 6]);
        assert!((eval_lcal(&c, 1.3) - (2.5 * 1.3 + 6f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn lcal_matches_exact_power_sum() {
        // Σ_{j=1..7} 4^j is an exact integer.
        let exact: u64 = (1..=7).map(|j| 4u64.pow(j)).sum();
        let got = eval_lcal(&v1(), 4f64.ln());
        assert!((got - (exact as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn lcal_survives_huge_u() {
        let v = vec_of(&[1000.0, 999.0, -1000.0]);
        let got = eval_lcal(&v, 50.0);
        assert!(got.is_finite());
        assert!((got - (50_000.0 + (1.0 + (-50f64).exp()).ln())).abs() < 1e-9);
    }

    #[test]
    fn l_examples() {
        for t in [3.01, 4.0, 10.0, 1e6] {
            let l = eval_l(&v1(), t).unwrap().value;
            assert!((7.0..8.0).contains(&l), "t={t} L={l}");
        }
        assert_eq!(eval_l(&vec_of(&[2.0, 2.0]), 2.0).unwrap().value, 3.0);
        let l = eval_l(&vec_of(&[0.0, 1.0]), std::f64::consts::E)
            .unwrap()
            .value;
        assert!((l - (1.0 + std::f64::consts::E).ln()).abs() < 1e-14);
        assert!((l - 1.31326).abs() < 1e-5);
    }

    #[test]
    fn r_examples() {
        let c = vec_of(&[-3.25; 5]);
        assert_eq!(eval_r(&c, 7.0).unwrap().value, -3.25);
        let e = std::f64::consts::E;
        let r = eval_r(&vec_of(&[0.0, 1.0]), e).unwrap().value;
        assert!((r - e / (1.0 + e)).abs() < 1e-15);
        assert!((r - 0.73106).abs() < 1e-5);
        for t in [2.72, 3.0, 10.0, 1e3] {
            let r = eval_r(&v2(), t).unwrap().value;
            assert!(r > 6.0 && r <= 7.0, "t={t} R={r}");
        }
    }

    #[test]
    fn bad_t_is_rejected() {
        assert!(eval_l(&v1(), 1.0).is_err());
        assert!(eval_r(&v1(), 0.5).is_err());
        assert!(eval_r(&v1(), f64::NAN).is_err());
    }

    #[test]
    fn rk_examples() {
        let e = std::f64::consts::E;
        let v = vec_of(&[0.0, 1.0]);
        let r2 = eval_rk(&v, e, 2).unwrap().value;
        let closed = 1.0 / (1.0 + (-1f64).exp()).powi(2);
        assert!((r2 - closed).abs() < 1e-14);
        // R^{(2)} from the series Σ_j (-1)^j (j+1) e^{-j}, summed to convergence.
        let series: f64 = (0..200)
            .map(|j| (if j % 2 == 0 { 1.0 } else { -1.0 }) * (j as f64 + 1.0) * (-(j as f64)).exp())
            .sum();
        assert!((r2 - series).abs() < 1e-12);
        assert!((r2 - 0.53445).abs() < 1e-5);

        let c = vec_of(&[4.0; 3]);
        for k in 1..=MAX_ORDER {
            assert_eq!(eval_rk(&c, 5.0, k).unwrap().value, 4.0);
        }
        assert!(matches!(
            eval_rk(&v, 2.0, 9),
            Err(Error::OrderLimit { k: 9, .. })
        ));
        assert!(eval_rk(&v, 2.0, 0).is_err());
    }

    #[test]
    fn ratio_rows() {
        assert_eq!(ratio_row(1), vec![1.0]);
        assert_eq!(ratio_row(2), vec![1.0, -1.0]);
        assert_eq!(ratio_row(3), vec![1.0, -1.5, 0.5]);
        let r4 = ratio_row(4);
        let want = [1.0, -11.0 / 6.0, 1.0, -1.0 / 6.0];
        for (a, b) in r4.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulant_recursion_small_cases() {
        // Bernoulli(1/4): κ = (1/4, 3/16, 3/32)
        let k = moments_to_cumulants(&[0.25, 0.25, 0.25]);
        assert!((k[0] - 0.25).abs() < 1e-15);
        assert!((k[1] - 0.1875).abs() < 1e-15);
        assert!((k[2] - 0.09375).abs() < 1e-15);
    }

    #[test]
    fn d_examples() {
        let c = vec_of(&[3.5; 4]);
        for alpha in [0.5, 1.05, 2.0] {
            assert_eq!(eval_d(&c, 3.0, alpha).unwrap().value, 3.5);
        }
        // First max-convolution coefficient of the worked D example is the single term 8.
        let d = eval_d(&vec_of(&[8.0]), 2.0, 1.05).unwrap().value;
        assert!((d - 8.0).abs() < 1e-10);
        assert!((2.1f64.powi(8) - 378.22859).abs() < 1e-5);
        assert!(eval_d(&c, 3.0, 1.0).is_err());
        assert!(eval_d(&c, 3.0, -2.0).is_err());
    }

    #[test]
    fn d_approaches_r_linearly() {
        let v = vec_of(&[0.3, -1.2, 2.0, 1.7, 0.0]);
        let t = 3.0;
        let r = eval_r(&v, t).unwrap().value;
        let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|h| (eval_d(&v, t, 1.0 + h).unwrap().value - r).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        let c = errs[1] / 1e-2;
        assert!(errs[2] <= c * 1e-3 * 1.5);
        let e4 = (eval_d(&v, t, 1.0 + 1e-4).unwrap().value - r).abs();
        assert!(e4 < errs[1] / 50.0);
    }

    #[test]
    fn pnorm_examples() {
        for p in [0.5, 1.0, 3.0, 40.0] {
            assert_eq!(eval_pnorm(&vec_of(&[1.0, 0.0, 0.0]), p).unwrap().value, 1.0);
        }
        assert!((eval_pnorm(&vec_of(&[3.0, 4.0]), 2.0).unwrap().value - 5.0).abs() < 1e-14);
        let scaled = v1().scaled(1.0 / 7.0).unwrap();
        let direct: f64 = scaled
            .entries()
            .iter()
            .map(|x| x.powf(50.0))
            .sum::<f64>()
            .powf(1.0 / 50.0);
        let got = eval_pnorm(&scaled, 50.0).unwrap().value;
        assert!((got - direct).abs() < 1e-12);
        assert!((got - 1.0).abs() < 0.1);
        assert_eq!(eval_pnorm(&vec_of(&[0.0, 0.0]), 2.0).unwrap().value, 0.0);
        assert!(matches!(
            eval_pnorm(&vec_of(&[1.0, -0.5]), 2.0),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
    }

    /// Central finite differences of `u ↦ 𝓛_v(e^u)` with step `h`.
    fn fd_derivative(v: &RealVector, u: f64, order: usize, h: f64) -> f64 {
        let f = |x: f64| eval_lcal(v, x);
        match order {
            1 => (f(u + h) - f(u - h)) / (2.0 * h),
            2 => (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h),
            3 => {
                (f(u + 2.0 * h) - 2.0 * f(u + h) + 2.0 * f(u - h) - f(u - 2.0 * h))
                    / (2.0 * h * h * h)
            }
            _ => unreachable!(),
        }
    }

    fn small_vectors() -> impl Strategy<Value = RealVector> {
        prop::collection::vec(-5.0f64..5.0, 1..12).prop_map(|xs| RealVector::new(xs).unwrap())
    }

    fn int_vectors() -> impl Strategy<Value = RealVector> {
        prop::collection::vec(-20i64..=20, 1..30).prop_map(|xs| RealVector::from_ints(xs).unwrap())
    }

    proptest! {
        #[test]
        fn sandwich(v in small_vectors(), t in 1.01f64..1e4) {
            let m = v.max();
            let r = eval_r(&v, t).unwrap().value;
            let l = eval_l(&v, t).unwrap().value;
            prop_assert!(r <= m + 1e-12 && m <= l + 1e-12);
            prop_assert!(r >= v.min() - 1e-12);
        }

        #[test]
        fn ratio_is_monotone(v in small_vectors(), t1 in 1.01f64..50.0, f in 1.01f64..20.0) {
            let a = eval_r(&v, t1).unwrap().value;
            let b = eval_r(&v, t1 * f).unwrap().value;
            prop_assert!(b >= a - 1e-12);
        }

        #[test]
        fn power_scaling(v in small_vectors(), u in 0.01f64..5.0, k in 1u32..6) {
            let k = k as f64;
            let lhs = eval_lcal(&v, k * u);
            let rhs = eval_lcal(&v.scaled(k).unwrap(), u);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn pnorm_bridge(xs in prop::collection::vec(0.01f64..10.0, 1..12), p in 0.1f64..30.0) {
            let v = RealVector::new(xs.clone()).unwrap();
            let logs = RealVector::new(xs.iter().map(|x| x.ln()).collect()).unwrap();
            let lhs = eval_pnorm(&v, p).unwrap().value.ln();
            let rhs = eval_lcal(&logs, p) / p;
            prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
            prop_assert!(eval_pnorm(&v, p).unwrap().value >= v.max() * (1.0 - 1e-12));
        }

        #[test]
        fn cumulants_match_finite_differences(
            xs in prop::collection::vec(-2.0f64..2.0, 1..12),
            u in 0.2f64..1.5,
        ) {
            let v = RealVector::new(xs).unwrap();
            let kappa = Weights::new(v.entries(), u).cumulants(v.entries(), 3);
            let spread = 1.0 + v.max() - v.min();
            for order in 1..=3 {
                let fd = fd_derivative(&v, u, order, 1e-3);
                let tol = 1e-6 * spread.powi(order as i32 + 2);
                prop_assert!((kappa[order - 1] - fd).abs() < tol,
                    "order {} cumulant {} fd {}", order, kappa[order - 1], fd);
            }
        }

        #[test]
        fn rk_one_is_r(v in small_vectors(), t in 1.01f64..100.0) {
            prop_assert_eq!(eval_rk(&v, t, 1).unwrap().value, eval_r(&v, t).unwrap().value);
        }

        #[test]
        fn rk_underestimates_at_large_t(
            xs in prop::collection::vec(-3i64..=3, 1..30),
            k in 1usize..=8,
        ) {
            let v = RealVector::from_ints(xs).unwrap();
            prop_assume!(v.max() > v.min());
            let t = 1e3 * v.len() as f64;
            let rk = eval_rk(&v, t, k).unwrap().value;
            prop_assert!(v.max() - rk >= -1e-12, "k={} gap={}", k, v.max() - rk);
        }

        #[test]
        fn errors_vanish_as_t_doubles(v in int_vectors()) {
            let m = v.max();
            let mut last = [f64::INFINITY; 3];
            for e in 1..=16 {
                let t = 2f64.powi(e);
                let errs = [
                    eval_l(&v, t).unwrap().value - m,
                    m - eval_r(&v, t).unwrap().value,
                    m - eval_rk(&v, t, 3).unwrap().value,
                ];
                for (now, prev) in errs.iter().zip(last.iter()) {
                    prop_assert!(*now >= -1e-12);
                    prop_assert!(*now <= *prev + 1e-12);
                }
                last = errs;
            }
            prop_assert!(last[1] < 1e-3 && last[2] < 1e-2);
        }
    }
}
