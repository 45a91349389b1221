#![no_main]

//! Input layout: one byte splitting the rest into `a` and `b`, one byte of
//! flags, then one signed byte per entry.

use libfuzzer_sys::fuzz_target;
use smoothmax::maxconv::{
    maxconv, maxconv_naive, minconv, minconv_naive, Algorithm, MaxConvOptions,
};
use smoothmax::RealVector;

fuzz_target!(|data: &[u8]| {
    if data.len() < 4 {
        return;
    }
    let (split, flags, rest) = (data[0] as usize, data[1], &data[2..]);
    let cut = 1 + split % (rest.len() - 1);
    let entry = |&x: &u8| f64::from(x as i8);
    let a: Vec<f64> = rest[..cut].iter().map(entry).collect();
    let b: Vec<f64> = rest[cut..].iter().map(entry).collect();
    let algorithm = if flags & 1 == 0 {
        Algorithm::LogSumExp
    } else {
        Algorithm::Difference
    };
    let (va, vb) = (
        RealVector::new(a.clone()).unwrap(),
        RealVector::new(b.clone()).unwrap(),
    );
    let opts = MaxConvOptions::default();
    if flags & 2 == 0 {
        let got = maxconv(&va, &vb, algorithm, &opts).unwrap();
        assert!(got.certified);
        assert_eq!(got.coefficients, maxconv_naive(&a, &b));
    } else {
        let got = minconv(&va, &vb, algorithm, &opts).unwrap();
        assert!(got.certified);
        assert_eq!(got.coefficients, minconv_naive(&a, &b));
    }
});
