#![no_main]

use libfuzzer_sys::fuzz_target;
use ltperm_core::field::make_field;
use ltperm_core::wire::{ElementWire, MatrixWire, SubElementWire};

// First byte picks the field; the rest is a JSON element, subfield element or
// matrix in wire form.
fuzz_target!(|data: &[u8]| {
    let Some((&pick, rest)) = data.split_first() else {
        return;
    };
    let (p, n, m) = [(2, 1, 3), (3, 2, 2), (5, 1, 2), (2, 2, 3)][pick as usize % 4];
    let ctx = make_field(p, n, m).unwrap();
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(w) = serde_json::from_str::<ElementWire>(text) {
        if let Ok(x) = w.decode(&ctx) {
            assert_eq!(ElementWire::encode(&ctx, x).decode(&ctx).unwrap(), x);
        }
    }
    if let Ok(w) = serde_json::from_str::<SubElementWire>(text) {
        if let Ok(c) = w.decode(&ctx) {
            assert_eq!(SubElementWire::encode(&ctx, c).decode(&ctx).unwrap(), c);
        }
    }
    if let Ok(w) = serde_json::from_str::<MatrixWire>(text) {
        if let Ok(a) = w.decode(&ctx) {
            assert_eq!(MatrixWire::encode(&a).decode(&ctx).unwrap(), a);
        }
    }
});
