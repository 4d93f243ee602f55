#![no_main]

use fracstef_cli::samples::parse_samples_str;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_samples_str(text);
});
