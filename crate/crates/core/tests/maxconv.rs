#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use smoothmax::maxconv::{
    conv, maxconv_d, maxconv_float, maxconv_l, minconv, minconv_float, power_sums, Algorithm,
    Backend, MaxConvOptions,
};
use smoothmax::RealVector;

fn ints(xs: &[i64]) -> RealVector {
    RealVector::from_ints(xs.iter().copied()).unwrap()
}

fn brute_max(a: &[i64], b: &[i64]) -> Vec<i64> {
    (0..a.len() + b.len() - 1)
        .map(|k| {
            (0..a.len())
                .filter(|&i| k >= i && k - i < b.len())
                .map(|i| a[i] + b[k - i])
                .max()
                .unwrap()
        })
        .collect()
}

fn brute_min(a: &[i64], b: &[i64]) -> Vec<i64> {
    let na: Vec<i64> = a.iter().map(|x| -x).collect();
    let nb: Vec<i64> = b.iter().map(|x| -x).collect();
    brute_max(&na, &nb).into_iter().map(|x| -x).collect()
}

fn with(t: Option<f64>, alpha: Option<f64>, backend: Option<Backend>) -> MaxConvOptions {
    MaxConvOptions {
        t_star: t,
        alpha_star: alpha,
        backend,
        rounding: None,
    }
}

const A: [i64; 6] = [3, 1, 2, 4, 1, 2];
const B: [i64; 4] = [5, 3, 0, 4];
const C: [i64; 9] = [8, 6, 7, 9, 7, 7, 8, 5, 6];

fn rationals(xs: &[i64]) -> Vec<BigRational> {
    xs.iter()
        .map(|&x| BigRational::from_integer(BigInt::from(x)))
        .collect()
}

/// `Σ_{i+j=k} t^{a_i+b_j}` in plain integer arithmetic.
fn direct_power_sums(a: &[i64], b: &[i64], t: i64) -> Vec<i64> {
    (0..a.len() + b.len() - 1)
        .map(|k| {
            (0..a.len())
                .filter(|&i| k >= i && k - i < b.len())
                .map(|i| t.pow((a[i] + b[k - i]) as u32))
                .sum()
        })
        .collect()
}

/// Rounds to six significant digits, the precision of the reference ℓ(6) values.
fn six_digits(x: i64) -> i64 {
    let digits = (x as f64).log10().floor() as i32 + 1;
    let scale = 10f64.powi((digits - 6).max(0));
    ((x as f64 / scale).round() * scale) as i64
}

const REFERENCE_L6: [i64; 9] = [
    1679620, 93312, 281448, 10365400, 334404, 329184, 1687400, 7812, 46656,
];

#[test]
fn logsumexp_worked_example() {
    for backend in [None, Some(Backend::FftFloat), Some(Backend::ExactInt)] {
        let r = maxconv_l(&ints(&A), &ints(&B), &with(Some(6.0), None, backend)).unwrap();
        assert_eq!(r.integers(), C);
        assert!(r.certified, "{backend:?}");
    }
    let l6 = power_sums(&ints(&A), &ints(&B), 6.0).unwrap();
    let direct = direct_power_sums(&A, &B, 6);
    assert_eq!(l6, rationals(&direct));
    assert_eq!(
        direct.iter().map(|&x| six_digits(x)).collect::<Vec<_>>(),
        REFERENCE_L6
    );
}

#[test]
fn plain_convolution_of_worked_powers() {
    let alpha = ints(&[216, 6, 36, 1296, 6, 36]);
    let beta = ints(&[7776, 216, 1, 1296]);
    let want = direct_power_sums(&A, &B, 6);
    let exact = conv(&alpha, &beta, Backend::ExactInt).unwrap();
    assert_eq!(
        exact.exact.unwrap(),
        want.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>()
    );
    let float = conv(&alpha, &beta, Backend::FftFloat).unwrap();
    assert!(float.error_bound < 0.5);
    for (g, &w) in float.values.iter().zip(&want) {
        assert!((g - w as f64).abs() <= float.error_bound);
    }
    let one = conv(&ints(&[1]), &ints(&[1]), Backend::ExactInt).unwrap();
    assert_eq!(one.values, vec![1.0]);
}

#[test]
fn difference_worked_example() {
    let e = std::f64::consts::E;
    let r = maxconv_d(&ints(&A), &ints(&B), &with(Some(6.0), Some(e), None)).unwrap();
    assert_eq!(r.integers(), C);
    let pre = [
        8.0, 6.0, 6.99486, 8.97562, 6.88525, 6.89789, 7.99561, 4.99561, 6.0,
    ];
    for (got, want) in r.raw_logs.iter().zip(pre) {
        assert!((got - want).abs() < 5e-6, "{got} vs {want}");
    }
    for backend in [None, Some(Backend::FftFloat), Some(Backend::ExactInt)] {
        let r = maxconv_d(&ints(&A), &ints(&B), &with(Some(2.0), Some(1.05), backend)).unwrap();
        assert_eq!(r.integers(), C, "{backend:?}");
    }
    let l2 = power_sums(&ints(&A), &ints(&B), 2.0).unwrap();
    assert_eq!(l2, rationals(&[256, 128, 152, 674, 228, 224, 290, 36, 64]));
}

#[test]
fn power_sums_with_negative_exponents() {
    let got = power_sums(&ints(&[-1, 0]), &ints(&[-2]), 2.0).unwrap();
    let eighth = BigRational::new(BigInt::from(1), BigInt::from(8));
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    assert_eq!(got, vec![eighth, quarter]);
}

#[test]
fn min_convolution_examples() {
    let r = minconv(
        &ints(&[0, 1]),
        &ints(&[0, 2]),
        Algorithm::Difference,
        &Default::default(),
    )
    .unwrap();
    assert_eq!(r.integers(), vec![0, 1, 3]);
    let r = minconv(
        &ints(&[4; 5]),
        &ints(&[-9; 3]),
        Algorithm::LogSumExp,
        &Default::default(),
    )
    .unwrap();
    assert_eq!(r.integers(), vec![-5; 7]);
}

#[test]
fn real_valued_pipeline_brackets_the_truth() {
    let a = RealVector::new(vec![0.31, 0.92, 0.05, 0.77, 0.64]).unwrap();
    let b = RealVector::new(vec![0.12, 0.58, 0.99, 0.40]).unwrap();
    let truth: Vec<f64> = (0..8)
        .map(|k| {
            (0..5)
                .filter(|&i| k >= i && k - i < 4)
                .map(|i| a.entries()[i] + b.entries()[k - i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut last = f64::INFINITY;
    for t in [1e2, 1e4, 1e8, 1e16] {
        let opts = MaxConvOptions {
            t_star: Some(t),
            ..Default::default()
        };
        let r = maxconv_float(&a, &b, Algorithm::LogSumExp, &opts).unwrap();
        assert!(!r.certified);
        let mut worst: f64 = 0.0;
        for k in 0..8 {
            assert!(r.coefficients[k] >= truth[k] - r.raw_errors[k]);
            // L - max <= log_t(#terms)
            assert!(r.coefficients[k] - truth[k] <= 4f64.ln() / t.ln() + r.raw_errors[k]);
            worst = worst.max(r.coefficients[k] - truth[k]);
        }
        assert!(worst < last);
        last = worst;

        let opts = MaxConvOptions {
            t_star: Some(t),
            alpha_star: Some(1.01),
            ..Default::default()
        };
        let r = maxconv_float(&a, &b, Algorithm::Difference, &opts).unwrap();
        for k in 0..8 {
            assert!(r.coefficients[k] <= truth[k] + r.raw_errors[k]);
        }
    }
}

#[test]
fn real_valued_min_pipeline_overestimates() {
    let a = RealVector::new(vec![0.0, 0.4, 0.9, 1.7]).unwrap();
    let b = RealVector::new(vec![0.0, 1.0, 2.0]).unwrap();
    let opts = MaxConvOptions {
        t_star: Some(1e30),
        alpha_star: Some(1.01),
        ..Default::default()
    };
    let r = minconv_float(&a, &b, Algorithm::Difference, &opts).unwrap();
    let truth = smoothmax::maxconv::minconv_naive(a.entries(), b.entries());
    for k in 0..truth.len() {
        let err = r.coefficients[k] - truth[k];
        assert!(err >= -r.raw_errors[k] && err < 1e-2, "k={k} err={err}");
    }
}

fn int_vec(max_len: usize, bound: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-bound..=bound, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn both_algorithms_match_brute_force(a in int_vec(48, 20), b in int_vec(48, 20)) {
        let want = brute_max(&a, &b);
        let l = maxconv_l(&ints(&a), &ints(&b), &Default::default()).unwrap();
        prop_assert_eq!(l.integers(), want.clone());
        prop_assert!(l.certified);
        let d = maxconv_d(&ints(&a), &ints(&b), &Default::default()).unwrap();
        prop_assert_eq!(d.integers(), want);
        prop_assert!(d.certified);
    }

    #[test]
    fn certified_output_matches_exact_backend(
        a in int_vec(16, 10),
        b in int_vec(16, 10),
        t in 1.5f64..40.0,
        alpha in 1.05f64..4.0,
    ) {
        for algorithm in [Algorithm::LogSumExp, Algorithm::Difference] {
            let fast = MaxConvOptions { t_star: Some(t), alpha_star: Some(alpha), backend: Some(Backend::FftFloat), rounding: None };
            let slow = MaxConvOptions { backend: Some(Backend::ExactInt), ..fast };
            let f = smoothmax::maxconv::maxconv(&ints(&a), &ints(&b), algorithm, &fast).unwrap();
            let e = smoothmax::maxconv::maxconv(&ints(&a), &ints(&b), algorithm, &slow).unwrap();
            if f.certified {
                prop_assert_eq!(f.integers(), brute_max(&a, &b));
            }
            if e.certified {
                prop_assert_eq!(e.integers(), brute_max(&a, &b));
            }
            // the float path never certifies what the exact rounding contradicts
            if f.certified && e.certified {
                prop_assert_eq!(f.integers(), e.integers());
            }
        }
    }

    #[test]
    fn raw_values_sit_in_their_windows(a in int_vec(24, 15), b in int_vec(24, 15)) {
        let want = brute_max(&a, &b);
        let l = maxconv_l(&ints(&a), &ints(&b), &Default::default()).unwrap();
        for (k, &c) in want.iter().enumerate() {
            let (r, e) = (l.raw_logs[k], l.raw_errors[k]);
            prop_assert!(c as f64 <= r + e && r - e < c as f64 + 1.0);
        }
        let d = maxconv_d(&ints(&a), &ints(&b), &Default::default()).unwrap();
        for (k, &c) in want.iter().enumerate() {
            let (r, e) = (d.raw_logs[k], d.raw_errors[k]);
            prop_assert!((c as f64) - 1.0 < r + e && r - e <= c as f64);
        }
    }

    #[test]
    fn shift_covariance(a in int_vec(20, 10), b in int_vec(20, 10), s in -50i64..50) {
        let shifted: Vec<i64> = a.iter().map(|x| x + s).collect();
        let base = maxconv_l(&ints(&a), &ints(&b), &Default::default()).unwrap().integers();
        let moved = maxconv_l(&ints(&shifted), &ints(&b), &Default::default()).unwrap().integers();
        prop_assert_eq!(moved, base.iter().map(|x| x + s).collect::<Vec<_>>());
    }

    #[test]
    fn min_max_duality(a in int_vec(20, 30), b in int_vec(20, 30)) {
        for algorithm in [Algorithm::LogSumExp, Algorithm::Difference] {
            let min = minconv(&ints(&a), &ints(&b), algorithm, &Default::default()).unwrap();
            let neg_a: Vec<i64> = a.iter().map(|x| -x).collect();
            let neg_b: Vec<i64> = b.iter().map(|x| -x).collect();
            let max = smoothmax::maxconv::maxconv(&ints(&neg_a), &ints(&neg_b), algorithm, &Default::default()).unwrap();
            prop_assert_eq!(min.integers(), max.integers().iter().map(|x| -x).collect::<Vec<_>>());
            prop_assert_eq!(min.integers(), brute_min(&a, &b));
        }
    }

    #[test]
    fn fft_convolution_rounds_to_exact(x in int_vec(64, 1000), y in int_vec(64, 1000)) {
        let fast = conv(&ints(&x), &ints(&y), Backend::FftFloat).unwrap();
        let exact = conv(&ints(&x), &ints(&y), Backend::ExactInt).unwrap();
        prop_assert!(fast.error_bound < 0.5);
        for (f, e) in fast.values.iter().zip(&exact.values) {
            prop_assert_eq!(f.round(), *e);
        }
    }

    #[test]
    fn float_floor_matches_integer_pipeline(a in int_vec(20, 10), b in int_vec(20, 10)) {
        let opts = MaxConvOptions { t_star: Some(21.0), ..Default::default() };
        let real = maxconv_float(&ints(&a), &ints(&b), Algorithm::LogSumExp, &opts).unwrap();
        let int = maxconv_l(&ints(&a), &ints(&b), &opts).unwrap();
        let floors: Vec<i64> = real
            .coefficients
            .iter()
            .zip(&real.raw_errors)
            .map(|(c, e)| (c + e).floor() as i64)
            .collect();
        prop_assert_eq!(floors, int.integers());
    }
}
