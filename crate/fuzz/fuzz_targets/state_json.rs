#![no_main]

use libfuzzer_sys::fuzz_target;
use steerkit::input::parse_state_json;
use steerkit::Tolerances;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = parse_state_json(text) {
            let _ = file.load(&Tolerances::default());
        }
    }
});
