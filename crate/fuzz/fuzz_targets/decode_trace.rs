#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use msolv_core::frontend::ContractBundle;
use msolv_core::semantics::{decode_trace, DataDomain, Machine};

fn bundle() -> &'static ContractBundle {
    static B: OnceLock<ContractBundle> = OnceLock::new();
    B.get_or_init(|| {
        ContractBundle::from_source(include_str!("../../crates/core/fixtures/auction.msol"))
            .unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(actions) = decode_trace(bundle(), text) else {
        return;
    };
    // Decoded actions run without tool errors unless an argument is out of
    // the domain.
    let m = Machine::network(bundle(), 4, DataDomain::new(3).unwrap()).unwrap();
    let mut s = m.init_state();
    for a in &actions {
        match m.step(&s, a) {
            Ok(t) if t.is_error() => break,
            Ok(t) => s = t,
            Err(_) => break,
        }
    }
});
