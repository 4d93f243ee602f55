#![no_main]

use fracstef_cli::config::{parse_config_str, resolve_config, Mode};
use libfuzzer_sys::fuzz_target;

// The config pipeline must reject arbitrary input with errors, never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(raw) = parse_config_str(text) {
        for mode in [
            Mode::SolveStefan,
            Mode::SolveMbp,
            Mode::Convergence,
            Mode::Monotonicity,
            Mode::Opcheck,
        ] {
            let _ = resolve_config(mode, raw.clone());
        }
    }
});
