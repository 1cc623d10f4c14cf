#![no_main]

use libfuzzer_sys::fuzz_target;
use sepcert::states::StateSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<StateSpec>() {
        let _ = spec.validate();
        let canon = spec.to_string();
        let back: StateSpec = canon.parse().expect("canonical form parses");
        assert_eq!(back.to_string(), canon);
    }
});
