#![no_main]

use libfuzzer_sys::fuzz_target;
use steerkit::input::{parse_grid_spec, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(grid) = parse_grid_spec(text) {
            assert!(grid.len() <= MAX_GRID_POINTS);
            let _ = grid.points();
        }
    }
});
