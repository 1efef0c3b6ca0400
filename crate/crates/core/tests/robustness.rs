//! Mutated inputs never panic the parsers or the trace decoder. Seeds come
//! from the fuzz corpus.

use std::path::PathBuf;

use proptest::prelude::*;

use msolv_core::frontend::ast::ClearPositions;
use msolv_core::frontend::{parse, print, ContractBundle};
use msolv_core::properties::parse_spec;
use msolv_core::semantics::{decode_trace, DataDomain, Machine};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| std::fs::read(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone)]
enum Edit {
    Delete(usize),
    Insert(usize, u8),
    Replace(usize, u8),
    Truncate(usize),
}

fn apply(mut bytes: Vec<u8>, edits: &[Edit]) -> Vec<u8> {
    for e in edits {
        let n = bytes.len().max(1);
        match *e {
            Edit::Delete(i) if !bytes.is_empty() => {
                bytes.remove(i % n);
            }
            Edit::Insert(i, b) => bytes.insert(i % (bytes.len() + 1), b),
            Edit::Replace(i, b) if !bytes.is_empty() => bytes[i % n] = b,
            Edit::Truncate(i) => bytes.truncate(i % (bytes.len() + 1)),
            _ => {}
        }
    }
    bytes
}

/// Bytes biased towards the syntax of all three formats.
fn interesting_byte() -> impl Strategy<Value = u8> {
    prop_oneof![
        prop::sample::select(b"(){}[];,.:\"=<>!&|+-*/ 0123456789abxz_\n".to_vec()),
        any::<u8>(),
    ]
}

fn edits() -> impl Strategy<Value = Vec<Edit>> {
    prop::collection::vec(
        prop_oneof![
            any::<usize>().prop_map(Edit::Delete),
            (any::<usize>(), interesting_byte()).prop_map(|(i, b)| Edit::Insert(i, b)),
            (any::<usize>(), interesting_byte()).prop_map(|(i, b)| Edit::Replace(i, b)),
            any::<usize>().prop_map(Edit::Truncate),
        ],
        0..8,
    )
}

fn mutated(target: &'static str) -> impl Strategy<Value = String> {
    let seeds = seeds(target);
    (prop::sample::select(seeds), edits())
        .prop_map(|(s, e)| String::from_utf8_lossy(&apply(s, &e)).into_owned())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn contracts(src in mutated("parse_contract")) {
        if let Ok(mut unit) = parse(&src) {
            let mut again = parse(&print(&unit)).expect("printed source reparses");
            unit.clear_positions();
            again.clear_positions();
            prop_assert_eq!(unit, again);
        }
        let _ = ContractBundle::from_source(&src);
    }

    #[test]
    fn specs(text in mutated("parse_spec")) {
        let b = ContractBundle::from_source(include_str!("../fixtures/auction_sum.msol")).unwrap();
        let _ = parse_spec(&text, &b.layout);
    }

    #[test]
    fn traces(text in mutated("decode_trace")) {
        let b = ContractBundle::from_source(include_str!("../fixtures/auction.msol")).unwrap();
        if let Ok(actions) = decode_trace(&b, &text) {
            let m = Machine::network(&b, 4, DataDomain::new(3).unwrap()).unwrap();
            let mut s = m.init_state();
            for a in &actions {
                match m.step(&s, a) {
                    Ok(t) if !t.is_error() => s = t,
                    _ => break,
                }
            }
        }
    }
}
