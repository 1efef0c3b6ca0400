#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use msolv_core::frontend::ContractBundle;
use msolv_core::properties::parse_spec;

fn bundle() -> &'static ContractBundle {
    static B: OnceLock<ContractBundle> = OnceLock::new();
    B.get_or_init(|| {
        ContractBundle::from_source(include_str!("../../crates/core/fixtures/auction_sum.msol"))
            .unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_spec(text, &bundle().layout);
    }
});
