#![no_main]

use libfuzzer_sys::fuzz_target;
use qproc::formats::{counts_to_csv, parse_counts_csv};
use qproc::tomography::correct_counts;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = parse_counts_csv(data) {
        let reparsed = parse_counts_csv(counts_to_csv(&records).as_bytes()).expect("writer output parses");
        assert_eq!(records, reparsed);
        let _ = correct_counts(&records);
    }
});
