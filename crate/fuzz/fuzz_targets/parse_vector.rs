#![no_main]

use libfuzzer_sys::fuzz_target;
use smoothmax::io::{format_vector, parse_vector};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_vector(text) {
        assert!(v.entries().iter().all(|x| x.is_finite()));
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
    }
});
