#![no_main]

use libfuzzer_sys::fuzz_target;
use ltperm_core::constructions::certificate::verify;
use ltperm_core::constructions::Certificate;

const CAP: u64 = 729;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cert) = serde_json::from_str::<Certificate>(text) else {
        return;
    };
    if let Ok(fresh) = verify(&cert, CAP) {
        // A certificate rebuilt by the verifier must verify against itself.
        verify(&fresh, CAP).unwrap();
    }
});
