#![no_main]

use libfuzzer_sys::fuzz_target;
use sepcert::io::{matrix_to_string, parse_matrix};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(op) = parse_matrix(text) {
        // what we write must read back unchanged
        let again = parse_matrix(&matrix_to_string(&op)).expect("round trip");
        assert_eq!(again.dims(), op.dims());
        assert!(again.max_abs_diff(&op) == 0.0);
    }
});
