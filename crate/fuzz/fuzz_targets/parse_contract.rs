#![no_main]

use libfuzzer_sys::fuzz_target;
use msolv_core::frontend::ast::ClearPositions;
use msolv_core::frontend::{parse, print, ContractBundle};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(mut unit) = parse(src) {
        // Printing and reparsing gives the same tree up to positions.
        let mut again = parse(&print(&unit)).expect("printed source reparses");
        unit.clear_positions();
        again.clear_positions();
        assert_eq!(unit, again);
    }
    let _ = ContractBundle::from_source(src);
});
