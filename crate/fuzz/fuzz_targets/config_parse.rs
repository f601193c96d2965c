#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(raw) = setext::cli::parse_config(text) {
            for k in raw.keys() {
                assert!(raw.get(k).is_some());
            }
        }
    }
});
