#![no_main]

use libfuzzer_sys::fuzz_target;
use setext::cli::{parse_config, ExperimentConfig};

// Validation only; nothing is run.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(raw) = parse_config(text) else { return };
    let _ = ExperimentConfig::from_raw(&raw);
});
