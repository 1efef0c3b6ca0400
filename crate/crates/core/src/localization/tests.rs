use std::collections::{BTreeSet, HashSet, VecDeque};

use super::*;
use crate::properties::parse_spec;
use crate::ptg::{build_ptg, taint_summary, TaintSummary};

const AUCTION: &str = include_str!("../../fixtures/auction.msol");
const AUCTION_SPEC: &str = include_str!("../../fixtures/auction.spec");

fn set<T: Ord + Copy>(xs: &[T]) -> BTreeSet<T> {
    xs.iter().copied().collect()
}

fn auction() -> (ContractBundle, SplitInvariant) {
    let b = ContractBundle::from_source(AUCTION).unwrap();
    let theta = parse_spec(AUCTION_SPEC, &b.layout).unwrap().invariant;
    (b, theta)
}

fn act(tx: usize, clients: &[u64], args: &[u64]) -> Action {
    Action {
        tx,
        clients: clients.to_vec(),
        args: args.to_vec(),
    }
}

#[test]
fn auction_neighbourhood() {
    let (b, _) = auction();
    let g = build_ptg(&taint_summary(&b));
    let n = saturating_neighbourhood(&g, &BTreeSet::new(), &set(&[0]));
    assert_eq!(n.imp, set(&[0, 1]));
    assert_eq!(n.trans, set(&[2]));
    assert_eq!(n.exp, set(&[3]));
    assert_eq!(n.addresses(), [0, 1, 2, 3]);
    assert_eq!(n.extend(Extension::Compositionality), [0, 1, 2, 3, 4]);
    assert_eq!(n.extend(Extension::Safety(1)), [0, 1, 2, 3]);
    assert_eq!(n.extend(Extension::Safety(3)).len(), 6);

    let wide = saturating_neighbourhood(&g, &BTreeSet::new(), &set(&[0, 7]));
    assert_eq!(wide.imp, set(&[0, 1, 7]));
    assert_eq!(wide.trans, set(&[2]));
    assert_eq!(wide.exp, set(&[3]));

    let guarded = saturating_neighbourhood(&g, &set(&[0]), &BTreeSet::new());
    assert_eq!(guarded.trans.len(), 1);
}

#[test]
fn unlabeled_graph_has_empty_neighbourhood() {
    let g = build_ptg(&TaintSummary::default());
    let n = saturating_neighbourhood(&g, &BTreeSet::new(), &BTreeSet::new());
    assert!(n.is_empty());
    assert!(n.addresses().is_empty());
}

#[test]
fn full_havoc_of_one_user() {
    let state = BundleState {
        control: Control::Live(ControlState::zero(0, 0)),
        users: vec![UserRecord {
            id: 5,
            maps: vec![0],
        }],
    };
    let succ = interference_successors(
        &SplitInvariant::default(),
        &state,
        DataDomain::new(1).unwrap(),
    );
    assert_eq!(succ.len(), 2);
}

#[test]
fn bid_then_interference() {
    let (b, theta) = auction();
    let d = DataDomain::new(4).unwrap();
    let a = [0, 1, 2, 3];
    let m = Machine::new(&b, &a, d).unwrap();
    let s = m.step(&m.init_state(), &act(0, &[3, 2], &[])).unwrap();
    let succ = local_step(&b, &a, &theta, &s, &act(1, &[3], &[10]), d).unwrap();
    assert_eq!(succ.len(), 16usize.pow(3));
    assert!(succ.iter().all(|t| t.users[0].maps == [0]));
    assert!(succ.iter().all(|t| t.live().unwrap().data == [10, 0]));
    let target: Vec<u64> = succ
        .iter()
        .find(|t| t.users.iter().map(|u| u.maps[0]).eq([0, 1, 2, 3]))
        .expect("the havoced state with bids 0, 1, 2, 3 is a successor")
        .ids()
        .collect();
    assert_eq!(target, a);
}

#[test]
fn violating_result_is_returned_alone() {
    let (b, _) = auction();
    let all_zero = parse_spec("(invariant (else (= (map 0 bids) 0)))", &b.layout)
        .unwrap()
        .invariant;
    let d = DataDomain::new(4).unwrap();
    let a = [0, 1, 2, 3];
    let m = Machine::new(&b, &a, d).unwrap();
    let s = m.step(&m.init_state(), &act(0, &[3, 2], &[])).unwrap();
    let succ = local_step(&b, &a, &all_zero, &s, &act(1, &[3], &[10]), d).unwrap();
    assert_eq!(succ.len(), 1);
    assert!(!satisfies(&all_zero, &succ[0]));
}

#[test]
fn reverted_action_still_havocs() {
    let (b, theta) = auction();
    let d = DataDomain::new(2).unwrap();
    let a = [0, 1, 2, 3];
    let m = Machine::new(&b, &a, d).unwrap();
    let s = m.step(&m.init_state(), &act(0, &[3, 2], &[])).unwrap();
    let stop = act(3, &[3], &[]);
    assert_eq!(m.step(&s, &stop).unwrap(), s);
    let succ = local_step(&b, &a, &theta, &s, &stop, d).unwrap();
    assert_eq!(succ, interference_successors(&theta, &s, d));
    assert!(succ.contains(&s));
}

#[test]
fn interference_is_idempotent_and_preserves_shape() {
    let (b, theta) = auction();
    let d = DataDomain::new(2).unwrap();
    let m = Machine::new(&b, &[0, 1, 2, 3], d).unwrap();
    let s = m.step(&m.init_state(), &act(0, &[3, 2], &[])).unwrap();
    let succ = interference_successors(&theta, &s, d);
    assert!(
        succ.contains(&s),
        "a state satisfying theta is its own successor"
    );
    for t in succ.iter().step_by(7) {
        assert_eq!(t.control, s.control);
        assert!(t.ids().eq(s.ids()));
        assert_eq!(interference_successors(&theta, t, d), succ);
    }
}

fn reachable(
    start: BundleState,
    mut next: impl FnMut(&BundleState) -> Vec<BundleState>,
) -> HashSet<BundleState> {
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        if s.is_error() {
            continue;
        }
        for t in next(&s) {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    seen
}

#[test]
fn local_bundle_over_all_users_covers_the_network() {
    let (b, theta) = auction();
    let d = DataDomain::new(2).unwrap();
    let a = [0, 1, 2, 3];
    let m = Machine::new(&b, &a, d).unwrap();
    let actions: Vec<_> = m.actions().collect();
    let global = reachable(m.init_state(), |s| {
        actions.iter().map(|p| m.step(s, p).unwrap()).collect()
    });
    let local = reachable(m.init_state(), |s| {
        actions
            .iter()
            .flat_map(|p| local_step(&b, &a, &theta, s, p, d).unwrap())
            .collect()
    });
    assert!(global.iter().all(|s| local.contains(s)));
    // The invariant is compositional, so no local step breaks it.
    assert!(local.iter().all(|s| satisfies(&theta, s)));
}
