#![no_main]

use libfuzzer_sys::fuzz_target;
use ltperm_core::constructions::certificate::{FqMapRecord, SelfMapRecord};
use ltperm_core::field::make_field;

fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else {
        return;
    };
    let (p, n, m) = [(3, 1, 2), (2, 1, 3), (2, 2, 2)][pick as usize % 3];
    let ctx = make_field(p, n, m).unwrap();
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(rec) = serde_json::from_str::<FqMapRecord>(text) {
        if let Ok(f) = rec.decode(&ctx) {
            assert_eq!(FqMapRecord::encode(&ctx, &f).decode(&ctx).unwrap(), f);
        }
    }
    if let Ok(rec) = serde_json::from_str::<SelfMapRecord>(text) {
        if let Ok(h) = rec.decode(&ctx) {
            assert_eq!(SelfMapRecord::encode(&ctx, &h).decode(&ctx).unwrap(), h);
        }
    }
});
