use super::*;
use crate::properties::{parse_spec, Formula, Spec};
use crate::ptg::{build_ptg, taint_summary};

const AUCTION: &str = include_str!("../../fixtures/auction.msol");
const AUCTION_SUM: &str = include_str!("../../fixtures/auction_sum.msol");
const AUCTION_FROZEN: &str = include_str!("../../fixtures/auction_frozen.msol");

struct Case {
    bundle: ContractBundle,
    ptg: PtGraph,
    spec: Spec,
}

fn case(src: &str, spec: &str) -> Case {
    let bundle = ContractBundle::from_source(src).unwrap();
    let ptg = build_ptg(&taint_summary(&bundle));
    let spec = parse_spec(spec, &bundle.layout).unwrap();
    Case { bundle, ptg, spec }
}

fn config(width: u32, threads: usize) -> CheckConfig {
    CheckConfig {
        threads: Some(threads),
        ..CheckConfig::new(DataDomain::new(width).unwrap())
    }
}

fn replays(c: &Case, v: &Verdict, theta: Option<&SplitInvariant>, cfg: &CheckConfig) {
    let trace = v.trace().expect("a counterexample carries a trace");
    replay(&c.bundle, trace, theta, cfg.domain).unwrap();
}

#[test]
fn auction_invariant_is_compositional() {
    let c = case(AUCTION, include_str!("../../fixtures/auction.spec"));
    let cfg = config(3, 2);
    let v = check_compositional(&c.bundle, &c.ptg, &c.spec.invariant, &cfg).unwrap();
    assert!(v.is_safe(), "{:?}", v.outcome);
    let v = check_safety(
        &c.bundle,
        &c.ptg,
        &c.spec.invariant,
        &c.spec.properties[0],
        &cfg,
    )
    .unwrap();
    assert!(v.is_safe(), "{:?}", v.outcome);
}

#[test]
fn all_zero_bids_is_refuted_by_one_bid() {
    let c = case(AUCTION, include_str!("../../fixtures/auction_bad.spec"));
    let cfg = config(3, 1);
    let v = check_compositional(&c.bundle, &c.ptg, &c.spec.invariant, &cfg).unwrap();
    let Outcome::CexToInvariant { trace, user } = &v.outcome else {
        panic!("expected an invariant counterexample, got {:?}", v.outcome);
    };
    // Constructor, then one bid.
    assert_eq!(trace.steps.len(), 2);
    assert_eq!(trace.steps[1].action.tx, 1);
    assert_ne!(trace.last.users[*user].maps[0], 0);
    replays(&c, &v, Some(&c.spec.invariant), &cfg);
    let trivial = GuardedProperty {
        k: 1,
        lits: Vec::new(),
        roles: Vec::new(),
        xi: Formula::True,
    };
    assert!(matches!(
        check_safety(&c.bundle, &c.ptg, &c.spec.invariant, &trivial, &cfg),
        Err(CheckError::PreconditionUnmet("cex_invariant"))
    ));
}

#[test]
fn false_property_fails_after_the_first_havoc() {
    let c = case(AUCTION, include_str!("../../fixtures/auction.spec"));
    let no_bids = parse_spec("(property (k 1) (xi (= (map 0 bids) 0)))", &c.bundle.layout)
        .unwrap()
        .properties
        .remove(0);
    let cfg = config(3, 2);
    let v = check_safety(&c.bundle, &c.ptg, &c.spec.invariant, &no_bids, &cfg).unwrap();
    let Outcome::CexToProperty { trace, users, .. } = &v.outcome else {
        panic!("expected a property counterexample, got {:?}", v.outcome);
    };
    // The invariant lets any non-zero account hold a bid, so the first
    // interference step already refutes the property.
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(users.len(), 1);
    assert_ne!(trace.last.users[users[0]].maps[0], 0);
    replays(&c, &v, Some(&c.spec.invariant), &cfg);
}

#[test]
fn weak_invariant_admits_a_spurious_withdraw() {
    let c = case(
        AUCTION_SUM,
        include_str!("../../fixtures/auction_sum_weak.spec"),
    );
    let cfg = config(3, 2);
    let theta = &c.spec.invariant;
    assert!(check_compositional(&c.bundle, &c.ptg, theta, &cfg)
        .unwrap()
        .is_safe());
    let v = check_safety(&c.bundle, &c.ptg, theta, &c.spec.properties[0], &cfg).unwrap();
    let Outcome::CexToProperty { trace, .. } = &v.outcome else {
        panic!("expected a property counterexample, got {:?}", v.outcome);
    };
    let names: Vec<&str> = trace
        .steps
        .iter()
        .map(|s| c.bundle.layout.transactions[s.action.tx].name.as_str())
        .collect();
    assert_eq!(names, ["constructor", "bid", "withdraw"]);
    replays(&c, &v, Some(theta), &cfg);
}

#[test]
fn frozen_auction_never_fails_an_assertion() {
    let c = case(
        AUCTION_FROZEN,
        include_str!("../../fixtures/auction_frozen.spec"),
    );
    let cfg = config(2, 2);
    let v = check_safety(
        &c.bundle,
        &c.ptg,
        &c.spec.invariant,
        &c.spec.properties[0],
        &cfg,
    )
    .unwrap();
    assert!(v.is_safe(), "{:?}", v.outcome);
    let g = global_oracle(&c.bundle, 4, None, &c.spec.properties, &cfg).unwrap();
    assert!(g.is_safe());
}

#[test]
fn oracle_agrees_on_auction() {
    let c = case(AUCTION, include_str!("../../fixtures/auction.spec"));
    let cfg = config(2, 2);
    let v = global_oracle(
        &c.bundle,
        4,
        Some(&c.spec.invariant),
        &c.spec.properties,
        &cfg,
    )
    .unwrap();
    assert!(v.is_safe(), "{:?}", v.outcome);

    let leading_zero = parse_spec(
        "(property (k 1) (xi (= (data leadingBid) 0)))",
        &c.bundle.layout,
    )
    .unwrap();
    let v = global_oracle(&c.bundle, 4, None, &leading_zero.properties, &cfg).unwrap();
    let Outcome::CexToProperty { property, .. } = v.outcome else {
        panic!("expected a property counterexample");
    };
    assert_eq!(property, Some(0));
    replays(&c, &v, None, &cfg);
}

#[test]
fn oracle_reports_the_error_state() {
    let src =
        "contract C { uint x; constructor() public {} function f() public { assert(x == 1); } }";
    let c = case(src, "");
    let cfg = config(1, 1);
    let v = global_oracle(&c.bundle, 3, None, &[], &cfg).unwrap();
    let Outcome::CexToProperty {
        trace, property, ..
    } = &v.outcome
    else {
        panic!("expected the error state, got {:?}", v.outcome);
    };
    assert_eq!(*property, None);
    assert!(trace.last.is_error());
    replays(&c, &v, None, &cfg);
}

#[test]
fn state_budget_is_enforced() {
    let c = case(AUCTION, include_str!("../../fixtures/auction.spec"));
    let cfg = CheckConfig {
        budget_states: 3,
        ..config(2, 1)
    };
    let v = check_compositional(&c.bundle, &c.ptg, &c.spec.invariant, &cfg).unwrap();
    assert_eq!(v.outcome, Outcome::Exhausted);
    let v = global_oracle(&c.bundle, 4, None, &[], &cfg).unwrap();
    assert_eq!(v.outcome, Outcome::Exhausted);
}

#[test]
fn verdicts_do_not_depend_on_thread_count() {
    let c = case(
        AUCTION_SUM,
        include_str!("../../fixtures/auction_sum_weak.spec"),
    );
    let theta = &c.spec.invariant;
    let phi = &c.spec.properties[0];
    let one = check_safety_unchecked(&c.bundle, &c.ptg, theta, phi, &config(2, 1)).unwrap();
    let four = check_safety_unchecked(&c.bundle, &c.ptg, theta, phi, &config(2, 4)).unwrap();
    assert_eq!(one.outcome, four.outcome);
    assert_eq!(one.stats.states, four.stats.states);
}

#[test]
fn tampered_trace_does_not_replay() {
    let c = case(AUCTION, include_str!("../../fixtures/auction_bad.spec"));
    let cfg = config(2, 1);
    let v = check_compositional(&c.bundle, &c.ptg, &c.spec.invariant, &cfg).unwrap();
    let mut trace = v.trace().unwrap().clone();
    trace.last.users[0].maps[0] = 1;
    assert!(matches!(
        replay(&c.bundle, &trace, Some(&c.spec.invariant), cfg.domain),
        Err(ReplayError::Diverges { step: 1 })
    ));
    trace.steps[0].state.users[0].maps[0] = 1;
    assert!(matches!(
        replay(&c.bundle, &trace, None, cfg.domain),
        Err(ReplayError::NotInitial)
    ));
}

#[test]
fn sum_invariant_is_not_preserved_under_interference() {
    let c = case(AUCTION_SUM, include_str!("../../fixtures/auction_sum.spec"));
    let theta = &c.spec.invariant;
    let cfg = config(3, 2);
    let v = check_compositional(&c.bundle, &c.ptg, theta, &cfg).unwrap();
    let Outcome::CexToInvariant { trace, user } = &v.outcome else {
        panic!("expected an invariant counterexample, got {:?}", v.outcome);
    };
    // Two users both hold the leading bid after havoc; one outbids and the
    // other no longer fits under the sum.
    let before = &trace.steps.last().unwrap().state;
    let lead = before.live().unwrap().data[0];
    assert_eq!(before.users.iter().filter(|u| u.maps[0] == lead).count(), 2);
    assert_eq!(before.users[*user].maps[0], lead);
    replays(&c, &v, Some(theta), &cfg);
    assert!(matches!(
        check_safety(&c.bundle, &c.ptg, theta, &c.spec.properties[0], &cfg),
        Err(CheckError::PreconditionUnmet(_))
    ));

    // Globally the invariant and the property both hold.
    for n in [4, 5] {
        let g =
            global_oracle(&c.bundle, n, Some(theta), &c.spec.properties, &config(2, 1)).unwrap();
        assert!(g.is_safe(), "{:?}", g.outcome);
    }
}

/// Reachable control states of the local bundle, enumerated state by state,
/// or the depth of the first state breaking `theta`.
fn explicit_local_controls(
    c: &Case,
    addresses: &[u64],
    theta: &SplitInvariant,
    domain: DataDomain,
) -> Result<Vec<ControlState>, usize> {
    use crate::localization::{local_step, satisfies};
    use crate::semantics::Machine;
    use std::collections::{HashSet, VecDeque};

    let m = Machine::new(&c.bundle, addresses, domain).unwrap();
    let actions: Vec<_> = m.actions().collect();
    let s0 = m.init_state();
    let mut seen = HashSet::from([s0.clone()]);
    let mut queue = VecDeque::from([(s0, 0)]);
    while let Some((s, depth)) = queue.pop_front() {
        if s.is_error() {
            continue;
        }
        if !satisfies(theta, &s) {
            return Err(depth);
        }
        for p in &actions {
            for t in local_step(&c.bundle, addresses, theta, &s, p, domain).unwrap() {
                if seen.insert(t.clone()) {
                    queue.push_back((t, depth + 1));
                }
            }
        }
    }
    let mut controls: Vec<_> = seen.iter().filter_map(|s| s.live().cloned()).collect();
    controls.sort();
    controls.dedup();
    Ok(controls)
}

#[test]
fn lazy_havoc_matches_explicit_local_bundle() {
    let cfg = config(1, 2);
    for (src, spec) in [
        (AUCTION, include_str!("../../fixtures/auction.spec")),
        (AUCTION, include_str!("../../fixtures/auction_bad.spec")),
        (AUCTION_SUM, include_str!("../../fixtures/auction_sum.spec")),
        (
            AUCTION_SUM,
            include_str!("../../fixtures/auction_sum_weak.spec"),
        ),
    ] {
        let c = case(src, spec);
        let theta = &c.spec.invariant;
        let addresses =
            compositional_neighbourhood(&c.ptg, theta).extend(Extension::Compositionality);
        let explicit = explicit_local_controls(&c, &addresses, theta, cfg.domain);
        let lazy = check_compositional(&c.bundle, &c.ptg, theta, &cfg).unwrap();
        match (explicit, lazy.outcome) {
            (Ok(e), Outcome::Safe { invariant }) => assert_eq!(e, invariant),
            // Counterexamples are shortest.
            (Err(depth), Outcome::CexToInvariant { trace, .. }) => {
                assert_eq!(trace.steps.len(), depth)
            }
            (e, l) => panic!("explicit {e:?} disagrees with lazy {l:?}"),
        }
    }
}
