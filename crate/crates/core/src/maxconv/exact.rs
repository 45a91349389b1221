//! Exact arithmetic for the max-convolution pipeline.
//!
//! Every finite double is a dyadic rational `p / 2^s`, so powers of `t` can be
//! formed exactly: with `d_i = max(a) - a_i`, the integers
//! `α_i = q^{d_i}·p^{D_a - d_i}` satisfy `α_i / p^{D_a} = t^{a_i - max(a)}`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest total exponent span the exact backend accepts.
const MAX_SPAN_BITS: u64 = 1 << 24;

/// A positive dyadic rational `num / den`, `den` a power of two, in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Dyadic {
    pub num: BigUint,
    pub den: BigUint,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Dyadic {
        assert!(x > 0.0 && x.is_finite());
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let (mant, exp) = if exp == 0 {
            (bits & ((1 << 52) - 1), -1074)
        } else {
            ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
        };
        let tz = mant.trailing_zeros() as i64;
        let (mant, exp) = (mant >> tz, exp + tz);
        if exp >= 0 {
            Dyadic {
                num: BigUint::from(mant) << exp as usize,
                den: BigUint::one(),
            }
        } else {
            Dyadic {
                num: BigUint::from(mant),
                den: BigUint::one() << (-exp) as usize,
            }
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        let num = &self.num * &other.num;
        let den = &self.den * &other.den;
        let tz = num
            .trailing_zeros()
            .unwrap_or(0)
            .min(den.trailing_zeros().unwrap_or(0));
        Dyadic {
            num: num >> tz as usize,
            den: den >> tz as usize,
        }
    }

    /// `self^e · lhs` compared with `rhs`, for any integer `e`.
    pub fn cmp_scaled(&self, e: i64, lhs: &BigUint, rhs: &BigUint) -> Ordering {
        let k = e.unsigned_abs() as u32;
        if e >= 0 {
            (self.num.pow(k) * lhs).cmp(&(self.den.pow(k) * rhs))
        } else {
            (self.den.pow(k) * lhs).cmp(&(self.num.pow(k) * rhs))
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone().into(), self.den.clone().into())
    }
}

/// Natural logarithm of an arbitrarily large positive integer.
pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite below 2^1000").ln()
    } else {
        let shift = bits - 64;
        (x >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub(crate) fn convolve_unsigned(x: &[BigUint], y: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub(crate) fn convolve_signed(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `ℓ̃_k = Σ_{i+j=k} t^{(a_i - max a) + (b_j - max b)}`, held as
/// `lambda[k] / p^span` with `t = p / q`.
pub(crate) struct ExactPowerConv {
    pub base: Dyadic,
    pub span: u64,
    pub lambda: Vec<BigUint>,
}

impl ExactPowerConv {
    pub fn new(a: &[i64], b: &[i64], base: &Dyadic) -> Result<Self> {
        let depths = |v: &[i64]| -> Vec<u64> {
            let top = *v.iter().max().unwrap();
            v.iter().map(|&x| (top - x) as u64).collect()
        };
        let (da, db) = (depths(a), depths(b));
        let span_a = *da.iter().max().unwrap();
        let span_b = *db.iter().max().unwrap();
        let span = span_a + span_b;
        let bits = span.saturating_mul(base.num.bits().max(base.den.bits()));
        if bits > MAX_SPAN_BITS {
            return Err(Error::RangeLimit(format!(
                "exact backend would need {bits}-bit integers"
            )));
        }
        let weights = |d: &[u64], span: u64| -> Vec<BigUint> {
            d.iter()
                .map(|&di| base.den.pow(di as u32) * base.num.pow((span - di) as u32))
                .collect()
        };
        let lambda = convolve_unsigned(&weights(&da, span_a), &weights(&db, span_b));
        Ok(ExactPowerConv {
            base: base.clone(),
            span,
            lambda,
        })
    }

    /// `p^span`, the common denominator of `ℓ̃`.
    pub fn scale(&self) -> BigUint {
        self.base.num.pow(self.span as u32)
    }

    pub fn ln_value(&self, k: usize) -> f64 {
        big_ln(&self.lambda[k]) - self.span as f64 * big_ln(&self.base.num)
    }

    /// Largest integer `f` with `t^f <= ℓ̃_k`, searched from `guess`.
    pub fn floor_log(&self, k: usize, guess: i64) -> i64 {
        let scale = self.scale();
        let fits = |f: i64| self.base.cmp_scaled(f, &scale, &self.lambda[k]) != Ordering::Greater;
        step_to_boundary(guess, fits)
    }
}

/// Smallest integer `c` with `α^c · ℓ̃_k >= ℓ̃'_k`, where `near` and `far` hold
/// `ℓ̃` at `t` and at `αt`.
pub(crate) fn ceil_log_ratio(
    alpha: &Dyadic,
    near: &ExactPowerConv,
    far: &ExactPowerConv,
    k: usize,
    guess: i64,
) -> i64 {
    // ℓ̃'/ℓ̃ = (Λ'_k · p^R) / (Λ_k · p'^R)
    let x = &far.lambda[k] * near.scale();
    let y = &near.lambda[k] * far.scale();
    let below = |c: i64| alpha.cmp_scaled(c, &y, &x) == Ordering::Less;
    step_to_boundary(guess, below) + 1
}

/// Largest integer satisfying a predicate that holds on a down-set.
fn step_to_boundary(guess: i64, holds: impl Fn(i64) -> bool) -> i64 {
    let mut f = guess;
    if holds(f) {
        while holds(f + 1) {
            f += 1;
        }
        f
    } else {
        f -= 1;
        while !holds(f) {
            f -= 1;
        }
        f
    }
}

/// `Σ_{i+j=k} t^{a_i + b_j}` exactly.
pub(crate) fn power_sums(a: &[i64], b: &[i64], t: f64) -> Result<Vec<BigRational>> {
    let base = Dyadic::from_f64(t);
    let conv = ExactPowerConv::new(a, b, &base)?;
    let top = a.iter().max().unwrap() + b.iter().max().unwrap();
    let t_rat = base.to_rational();
    let shift = if top >= 0 {
        num_traits::pow(t_rat, top as usize)
    } else {
        num_traits::pow(t_rat.recip(), top.unsigned_abs() as usize)
    };
    let scale = BigRational::from_integer(conv.scale().into());
    Ok(conv
        .lambda
        .iter()
        .map(|l| BigRational::from_integer(l.clone().into()) / &scale * &shift)
        .collect())
}
