use std::collections::BTreeSet;

use super::*;
use crate::frontend::ContractBundle;
use crate::semantics::{Action, DataDomain, Machine};

const AUCTION: &str = include_str!("../../fixtures/auction.msol");
const AUCTION_SUM: &str = include_str!("../../fixtures/auction_sum.msol");
const REGISTRY: &str = include_str!("../../fixtures/registry.msol");

fn summary(src: &str) -> TaintSummary {
    taint_summary(&ContractBundle::from_source(src).unwrap())
}

fn set<T: Ord + Copy>(xs: &[T]) -> BTreeSet<T> {
    xs.iter().copied().collect()
}

#[test]
fn auction_summary() {
    for src in [AUCTION, AUCTION_SUM] {
        let s = summary(src);
        assert_eq!(s.args, set(&[0]));
        assert_eq!(s.roles, set(&[0]));
        assert_eq!(s.lits, set(&[0, 1]));
    }
}

#[test]
fn address_free_contract_keeps_guard_participants() {
    let s = summary(
        "contract C { uint x; constructor() public {} function f(uint a) public { x = a; } }",
    );
    assert_eq!(s.args, set(&[0]));
    assert!(s.roles.is_empty());
    assert_eq!(s.lits, set(&[0, 1]));
}

#[test]
fn registry_follows_calls_into_sub_contracts() {
    let s = summary(REGISTRY);
    assert_eq!(s.args, set(&[0]));
    assert_eq!(s.roles, set(&[0, 1]));
    assert_eq!(s.lits, set(&[0, 1, 2]));
}

#[test]
fn stored_clients_are_not_sinks_until_compared() {
    let quiet = summary("contract C { address a; constructor(address x) public { a = x; } }");
    assert_eq!(quiet.args, set(&[0]));
    assert!(quiet.roles.is_empty());
    let loud = summary(
        "contract C { address a; constructor(address x) public { a = x; }
         function f(address y) public { require(y == a); } }",
    );
    assert_eq!(loud.args, set(&[0, 1]));
    assert_eq!(loud.roles, set(&[0]));
}

#[test]
fn locals_carry_taint() {
    let s = summary(
        "contract C { mapping(address => uint) m; constructor() public {}
         function f(address y) public { address z; z = y; m[z] = 1; } }",
    );
    assert_eq!(s.args, set(&[0, 1]));
    let s = summary(
        "contract C { bool b; constructor() public {}
         function f() public { b = this == address(7); } }",
    );
    assert_eq!(s.lits, set(&[0, 1, 7]));
}

#[test]
fn adding_statements_never_shrinks_the_summary() {
    let base = "contract C { address a; mapping(address => uint) m; constructor(address x) public { a = x; }";
    let extras = [
        "function f() public { m[msg.sender] = 1; }",
        "function g(address y) public { require(y != a); }",
        "function h() public { require(a == address(4)); }",
    ];
    let mut src = base.to_string();
    let mut prev = summary(&format!("{src} }}"));
    for e in extras {
        src.push_str(e);
        let next = summary(&format!("{src} }}"));
        assert!(prev.args.is_subset(&next.args));
        assert!(prev.roles.is_subset(&next.roles));
        assert!(prev.lits.is_subset(&next.lits));
        prev = next;
    }
}

#[test]
fn auction_graph_matches_the_reference_topology() {
    let g = build_ptg(&summary(AUCTION));
    assert_eq!(
        g.vertices,
        [Vertex::Sc, Vertex::Addr(0), Vertex::Addr(1), Vertex::Star]
    );
    let shared = [Label::Explicit(0), Label::Transient(0)];
    let expect = |to, extra: Option<Label>| Edge {
        from: Vertex::Sc,
        to,
        labels: shared.iter().copied().chain(extra).collect(),
    };
    assert_eq!(
        g.edges,
        [
            expect(Vertex::Addr(0), Some(Label::Implicit(0))),
            expect(Vertex::Addr(1), Some(Label::Implicit(1))),
            expect(Vertex::Star, None),
        ]
    );
    assert_eq!(g.tau(0), Vertex::Addr(0));
    assert_eq!(g.tau(7), Vertex::Star);
    let json = serde_json::to_string(&g).unwrap();
    assert!(json.contains("\"implicit@1\""), "{json}");
    assert!(g.to_dot().contains("\"sc\" -> \"*\""));
}

#[test]
fn degenerate_graphs() {
    let g = build_ptg(&TaintSummary::default());
    assert_eq!(g.vertices, [Vertex::Sc, Vertex::Star]);
    assert_eq!(g.edges.len(), 1);
    assert!(g.edges[0].labels.is_empty());

    let g = build_ptg(&TaintSummary {
        lits: set(&[5]),
        ..TaintSummary::default()
    });
    assert_eq!(g.vertices, [Vertex::Sc, Vertex::Addr(5), Vertex::Star]);
    assert_eq!(
        g.edge(Vertex::Sc, Vertex::Addr(5)).unwrap().labels,
        [Label::Implicit(5)]
    );
}

#[test]
fn bid_participants() {
    let b = ContractBundle::from_source(AUCTION).unwrap();
    let d = DataDomain::new(2).unwrap();
    let bid = Action {
        tx: 1,
        clients: vec![3],
        args: vec![1],
    };
    let pt = semantic_pt(&b, 4, &bid, d).unwrap();
    assert!(pt.explicit.contains(&(0, 3)));
    assert!(pt.transient.iter().any(|&(r, _)| r == 0));
    assert!(pt.implicit.contains(&0) && pt.implicit.contains(&1));
    let g = build_ptg(&taint_summary(&b));
    assert_eq!(pt.uncovered(&g).count(), 0);
}

#[test]
fn zero_account_stop_only_involves_guard_users() {
    let b = ContractBundle::from_source(AUCTION).unwrap();
    let stop = Action {
        tx: 3,
        clients: vec![0],
        args: vec![],
    };
    let pt = semantic_pt(&b, 4, &stop, DataDomain::new(2).unwrap()).unwrap();
    assert!(pt.events.iter().all(|e| e.address <= 1), "{:?}", pt.events);
}

#[test]
fn zero_comparison_contract() {
    let src = "contract C { bool hit; constructor() public {}
        function f() public { require(msg.sender != address(0)); hit = true; } }";
    let b = ContractBundle::from_source(src).unwrap();
    let s = taint_summary(&b);
    assert_eq!(s.args, set(&[0]));
    assert!(s.roles.is_empty());
    assert_eq!(s.lits, set(&[0, 1]));
    let g = build_ptg(&s);
    let d = DataDomain::new(1).unwrap();
    let m = Machine::network(&b, 4, d).unwrap();
    for a in m.actions() {
        let pt = semantic_pt(&b, 4, &a, d).unwrap();
        assert!(
            pt.implicit.is_subset(&set(&[0, 1])),
            "{a:?}: {:?}",
            pt.implicit
        );
        assert_eq!(pt.uncovered(&g).count(), 0, "{a:?}");
    }
}

#[test]
fn budget_is_enforced() {
    let b = ContractBundle::from_source(AUCTION).unwrap();
    let a = Action {
        tx: 1,
        clients: vec![3],
        args: vec![1],
    };
    assert!(matches!(
        semantic_pt_with_budget(&b, 4, &a, DataDomain::new(2).unwrap(), 1000),
        Err(PtError::BudgetExceeded { .. })
    ));
}
