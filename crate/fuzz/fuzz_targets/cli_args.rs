#![no_main]

use libfuzzer_sys::fuzz_target;

// argv is split on NUL bytes.
fuzz_target!(|data: &[u8]| {
    let args = std::iter::once("setext".to_string())
        .chain(data.split(|&b| b == 0).map(|a| String::from_utf8_lossy(a).into_owned()));
    let _ = setext::cli::parse_args(args);
});
