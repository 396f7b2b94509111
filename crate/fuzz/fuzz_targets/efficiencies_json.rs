#![no_main]

use libfuzzer_sys::fuzz_target;
use qproc::formats::parse_efficiencies;

fuzz_target!(|data: &[u8]| {
    if let Ok(map) = parse_efficiencies(data) {
        assert!(map.values().all(|e| e.is_finite() && *e > 0.0));
    }
});
