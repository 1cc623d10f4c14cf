#![no_main]

use libfuzzer_sys::fuzz_target;
use sepcert::polytope::parse_polytope;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_polytope(text) {
        let doc = serde_json::to_string(&p.to_doc()).expect("serialises");
        let q = parse_polytope(&doc).expect("round trip");
        assert_eq!(p.len(), q.len());
        assert_eq!(p.dims(), q.dims());
    }
});
