#![no_main]

use libfuzzer_sys::fuzz_target;
use ltperm_core::config::parse_configs;

// Small cap keeps every accepted field cheap to tabulate.
const CAP: u64 = 729;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(configs) = parse_configs(text) else { return };
    for c in configs.iter().take(4) {
        let _ = c.build(CAP);
    }
});
