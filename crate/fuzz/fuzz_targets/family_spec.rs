#![no_main]

use libfuzzer_sys::fuzz_target;
use steerkit::input::parse_family_spec;
use steerkit::{make_family, Tolerances};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_family_spec(text) {
            let _ = make_family(&spec, &Tolerances::default());
        }
    }
});
