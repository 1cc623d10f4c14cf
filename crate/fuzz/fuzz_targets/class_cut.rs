#![no_main]

use libfuzzer_sys::fuzz_target;
use sepcert::multiparty::{Cut, SeparabilityClass};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(class) = text.parse::<SeparabilityClass>() {
        for n in 2..6 {
            let _ = class.validate(n);
        }
        let back: SeparabilityClass = class.to_string().parse().expect("display parses");
        assert_eq!(back, class);
    }
    if let Ok(cut) = text.parse::<Cut>() {
        let back: Cut = cut.to_string().parse().expect("display parses");
        assert_eq!(back, cut);
    }
});
