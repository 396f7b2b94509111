#![no_main]

use libfuzzer_sys::fuzz_target;
use qproc::cli::parse_offset;
use qproc::gate::ProgramLabel;
use qproc::tomography::{InputState, ProjectorLabel};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let _ = s.parse::<ProgramLabel>();
    let _ = s.parse::<InputState>();
    let _ = s.parse::<ProjectorLabel>();
    if let Ok(angles) = parse_offset(s) {
        let _ = angles.unitary();
    }
});
