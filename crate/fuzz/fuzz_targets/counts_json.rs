#![no_main]

use libfuzzer_sys::fuzz_target;
use qproc::formats::{counts_to_json, parse_counts_json};
use qproc::tomography::{correct_counts, mle_reconstruct, MleOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(records) = parse_counts_json(data) else {
        return;
    };
    let reparsed = parse_counts_json(counts_to_json(&records).as_bytes()).expect("writer output parses");
    assert_eq!(records, reparsed);
    if let Ok(dataset) = correct_counts(&records) {
        let options = MleOptions { max_iter: 50, ..MleOptions::default() };
        let _ = mle_reconstruct(&dataset, options);
    }
});
