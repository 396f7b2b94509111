#![no_main]

use libfuzzer_sys::fuzz_target;
use qproc::formats::{parse_process_matrix, process_matrix_to_json};
use qproc::metrics::{concurrence, purity};

fuzz_target!(|data: &[u8]| {
    let Ok(chi) = parse_process_matrix(data) else {
        return;
    };
    let again = parse_process_matrix(process_matrix_to_json(&chi).as_bytes()).expect("writer output parses");
    assert_eq!(chi.matrix(), again.matrix());
    let _ = purity(&chi);
    let _ = concurrence(&chi);
});
