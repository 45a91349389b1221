#![no_main]

use libfuzzer_sys::fuzz_target;
use smoothmax::io::{format_curve_grid, parse_curve_grid};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = parse_curve_grid(text) {
        assert!(grid.len() >= 2);
        assert_eq!(grid.times()[0], 0.0);
        assert_eq!(parse_curve_grid(&format_curve_grid(&grid)).unwrap(), grid);
    }
});
