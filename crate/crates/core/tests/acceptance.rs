//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use msolv_core::checker::{
    check_compositional, check_safety, global_oracle, replay, CheckConfig, Outcome, Trace, Verdict,
};
use msolv_core::frontend::ContractBundle;
use msolv_core::localization::{saturating_neighbourhood, Extension};
use msolv_core::properties::{parse_spec, GuardedProperty, Spec, SplitInvariant};
use msolv_core::ptg::{build_ptg, semantic_pt, taint_summary, Edge, Label, PtGraph, Vertex};
use msolv_core::semantics::{
    swap_action, swap_state, BundleState, Control, ControlState, DataDomain, Machine, UserRecord,
};

const AUCTION: &str = include_str!("../fixtures/auction.msol");
const AUCTION_SUM: &str = include_str!("../fixtures/auction_sum.msol");
const AUCTION_SPEC: &str = include_str!("../fixtures/auction.spec");
const AUCTION_BAD_SPEC: &str = include_str!("../fixtures/auction_bad.spec");
const SUM_SPEC: &str = include_str!("../fixtures/auction_sum.spec");
const SUM_WEAK_SPEC: &str = include_str!("../fixtures/auction_sum_weak.spec");

type Outcome1 = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || {
        format!("{what} took {took:.2?}, limit {limit:?}")
    })
}

struct Loaded {
    bundle: ContractBundle,
    ptg: PtGraph,
    spec: Spec,
}

fn load(src: &str, spec: &str) -> Loaded {
    let bundle = ContractBundle::from_source(src).expect("fixture parses");
    let ptg = build_ptg(&taint_summary(&bundle));
    let spec = parse_spec(spec, &bundle.layout).expect("fixture spec parses");
    Loaded { bundle, ptg, spec }
}

fn config(width: u32, states: u64, secs: u64) -> CheckConfig {
    CheckConfig {
        budget_states: states,
        budget_time: Duration::from_secs(secs),
        ..CheckConfig::new(DataDomain::new(width).unwrap())
    }
}

/// A safe verdict to confirm with the oracle, or a trace to replay.
struct Evidence {
    safe: Vec<(&'static str, Loaded, Option<GuardedProperty>)>,
    traces: Vec<(
        String,
        ContractBundle,
        Trace,
        Option<SplitInvariant>,
        DataDomain,
    )>,
}

fn keep_trace(
    ev: &mut Evidence,
    name: &str,
    l: &Loaded,
    v: &Verdict,
    theta: Option<&SplitInvariant>,
    d: DataDomain,
) {
    if let Some(t) = v.trace() {
        ev.traces.push((
            name.to_string(),
            l.bundle.clone(),
            t.clone(),
            theta.cloned(),
            d,
        ));
    }
}

fn c1_auction_pipeline() -> Outcome1 {
    let start = Instant::now();
    let b = ContractBundle::from_source(AUCTION_SUM).map_err(|e| e.to_string())?;
    let s = taint_summary(&b);
    ensure(s.args == BTreeSet::from([0]), || {
        format!("args {:?}", s.args)
    })?;
    ensure(
        s.roles == BTreeSet::from([0]) && b.layout.roles[0].name == "manager",
        || format!("roles {:?}", s.roles),
    )?;
    ensure(s.lits == BTreeSet::from([0, 1]), || {
        format!("lits {:?}", s.lits)
    })?;
    let g = build_ptg(&s);
    let base = [Label::Explicit(0), Label::Transient(0)];
    let edge = |to: Vertex, extra: &[Label]| Edge {
        from: Vertex::Sc,
        to,
        labels: base.iter().chain(extra).copied().collect(),
    };
    let expected = [
        edge(Vertex::Addr(0), &[Label::Implicit(0)]),
        edge(Vertex::Addr(1), &[Label::Implicit(1)]),
        edge(Vertex::Star, &[]),
    ];
    ensure(
        g.edges.len() == expected.len() && expected.iter().all(|e| g.edges.contains(e)),
        || format!("edges {:?}", g.edges),
    )?;
    ensure(
        g.vertices.iter().copied().collect::<BTreeSet<_>>()
            == BTreeSet::from([Vertex::Sc, Vertex::Addr(0), Vertex::Addr(1), Vertex::Star]),
        || format!("vertices {:?}", g.vertices),
    )?;
    within(start, Duration::from_secs(1), "pipeline")?;
    Ok("args={sender} roles={manager} lits={0,1}; star graph with implicit@0, implicit@1".into())
}

fn c2_neighbourhood() -> Outcome1 {
    let start = Instant::now();
    let b = ContractBundle::from_source(AUCTION).map_err(|e| e.to_string())?;
    let g = build_ptg(&taint_summary(&b));
    let n = saturating_neighbourhood(&g, &BTreeSet::new(), &BTreeSet::from([0]));
    ensure(n.addresses() == [0, 1, 2, 3], || {
        format!("addresses {:?}", n.addresses())
    })?;
    ensure(
        n.imp == BTreeSet::from([0, 1])
            && n.trans == BTreeSet::from([2])
            && n.exp == BTreeSet::from([3]),
        || format!("partition {n:?}"),
    )?;
    let comp = n.extend(Extension::Compositionality);
    ensure(comp.len() == 5, || {
        format!("compositional extension {comp:?}")
    })?;
    let safety = n.extend(Extension::Safety(1));
    ensure(safety == [0, 1, 2, 3], || {
        format!("k=1 extension {safety:?}")
    })?;
    within(start, Duration::from_secs(1), "neighbourhood")?;
    Ok("impl={0,1} trans={2} exp={3}; sizes 5 and 4".into())
}

fn c3_compositionality(ev: &mut Evidence) -> Outcome1 {
    let cfg = config(3, 1_000_000, 60);
    let good = load(AUCTION, AUCTION_SPEC);
    let start = Instant::now();
    let v = check_compositional(&good.bundle, &good.ptg, &good.spec.invariant, &cfg)
        .map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(60), "compositional check")?;
    ensure(v.is_safe(), || {
        format!("auction invariant: {}", v.result_name())
    })?;
    let states = v.stats.states;
    ev.safe.push(("auction invariant", good, None));

    let bad = load(AUCTION, AUCTION_BAD_SPEC);
    let b = check_compositional(&bad.bundle, &bad.ptg, &bad.spec.invariant, &cfg)
        .map_err(|e| e.to_string())?;
    keep_trace(
        ev,
        "all bids zero",
        &bad,
        &b,
        Some(&bad.spec.invariant),
        cfg.domain,
    );
    let Outcome::CexToInvariant { trace, .. } = &b.outcome else {
        return Err(format!("all-zero invariant: {}", b.result_name()));
    };
    ensure(trace.steps.len() <= 3, || {
        format!("trace of {} actions", trace.steps.len())
    })?;
    Ok(format!(
        "safe in {states} states; all-zero invariant refuted in {} actions",
        trace.steps.len()
    ))
}

fn c4_properties(ev: &mut Evidence) -> Outcome1 {
    let cfg = config(3, 10_000_000, 120);
    let limit = Duration::from_secs(120);
    let mut failures = Vec::new();

    let auction = load(AUCTION, AUCTION_SPEC);
    let start = Instant::now();
    let v = check_safety(
        &auction.bundle,
        &auction.ptg,
        &auction.spec.invariant,
        &auction.spec.properties[0],
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    within(start, limit, "zero-account property")?;
    keep_trace(
        ev,
        "zero-account property",
        &auction,
        &v,
        Some(&auction.spec.invariant),
        cfg.domain,
    );
    if v.is_safe() {
        let phi = auction.spec.properties[0].clone();
        ev.safe.push(("zero-account property", auction, Some(phi)));
    } else {
        failures.push(format!("zero-account property: {}", v.result_name()));
    }

    let sum = load(AUCTION_SUM, SUM_SPEC);
    let start = Instant::now();
    match check_safety(
        &sum.bundle,
        &sum.ptg,
        &sum.spec.invariant,
        &sum.spec.properties[0],
        &cfg,
    ) {
        Ok(v) if v.is_safe() => {
            within(start, limit, "sum property")?;
            let phi = sum.spec.properties[0].clone();
            ev.safe.push(("sum property", sum, Some(phi)));
        }
        Ok(v) => {
            keep_trace(
                ev,
                "sum property",
                &sum,
                &v,
                Some(&sum.spec.invariant),
                cfg.domain,
            );
            failures.push(format!("sum property: {}", v.result_name()));
        }
        Err(e) => {
            // Surface the counterexample that breaks compositionality.
            let pre = check_compositional(&sum.bundle, &sum.ptg, &sum.spec.invariant, &cfg)
                .map_err(|e| e.to_string())?;
            keep_trace(
                ev,
                "sum invariant",
                &sum,
                &pre,
                Some(&sum.spec.invariant),
                cfg.domain,
            );
            let detail = pre
                .trace()
                .map(|t| {
                    let steps: Vec<String> = t
                        .steps
                        .iter()
                        .map(|s| s.action.describe(&sum.bundle))
                        .collect();
                    format!(" (trace: {})", steps.join(", "))
                })
                .unwrap_or_default();
            failures.push(format!("sum property: {e}{detail}"));
        }
    }

    let weak = load(AUCTION_SUM, SUM_WEAK_SPEC);
    let start = Instant::now();
    let v = check_safety(
        &weak.bundle,
        &weak.ptg,
        &weak.spec.invariant,
        &weak.spec.properties[0],
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    within(start, limit, "weak sum check")?;
    keep_trace(
        ev,
        "weak sum invariant",
        &weak,
        &v,
        Some(&weak.spec.invariant),
        cfg.domain,
    );
    match &v.outcome {
        Outcome::CexToProperty { trace, .. } => {
            let names: Vec<&str> = trace
                .steps
                .iter()
                .map(|s| weak.bundle.tx_name(s.action.tx))
                .collect();
            let bid = trace
                .steps
                .iter()
                .position(|s| weak.bundle.tx_name(s.action.tx) == "bid");
            let withdraw = trace
                .steps
                .iter()
                .rposition(|s| weak.bundle.tx_name(s.action.tx) == "withdraw");
            let shaped = match (bid, withdraw) {
                (Some(b), Some(w)) if b < w => {
                    let amount = trace.steps[b].action.args[0];
                    let pre = &trace.steps[w].state;
                    let sender = trace.steps[w].action.sender();
                    let withdrawn = pre.users.iter().find(|u| u.id == sender).map(|u| u.maps[0]);
                    withdrawn.is_some_and(|x| 0 < x && x < amount)
                }
                _ => false,
            };
            if !shaped {
                failures.push(format!(
                    "weak sum invariant: trace {names:?} is not a bid then a smaller withdraw"
                ));
            }
        }
        _ => failures.push(format!("weak sum invariant: {}", v.result_name())),
    }

    if failures.is_empty() {
        Ok(
            "zero-account and sum properties safe; weak invariant gives bid then smaller withdraw"
                .into(),
        )
    } else {
        Err(failures.join("; "))
    }
}

fn c5_oracle(ev: &mut Evidence) -> Outcome1 {
    let cfg = config(2, 50_000_000, 300);
    let mut runs = 0;
    let mut traces = Vec::new();
    let mut result = Ok(());
    'outer: for (name, l, phi) in &ev.safe {
        for n in [4, 5] {
            let start = Instant::now();
            let props: Vec<GuardedProperty> = phi.iter().cloned().collect();
            let v = global_oracle(&l.bundle, n, Some(&l.spec.invariant), &props, &cfg)
                .map_err(|e| e.to_string())?;
            if let Some(t) = v.trace() {
                traces.push((
                    format!("oracle {name}"),
                    l.bundle.clone(),
                    t.clone(),
                    None,
                    cfg.domain,
                ));
            }
            result = within(
                start,
                Duration::from_secs(300),
                &format!("oracle for {name} at N={n}"),
            )
            .and_then(|()| {
                ensure(v.is_safe(), || {
                    format!("{name} at N={n}: oracle says {}", v.result_name())
                })
            });
            if result.is_err() {
                break 'outer;
            }
            runs += 1;
        }
    }
    ev.traces.extend(traces);
    result?;
    ensure(runs > 0, || "no safe verdicts to confirm".into())?;
    Ok(format!("{runs} oracle runs agree"))
}

fn c6_participation() -> Outcome1 {
    let start = Instant::now();
    let b = ContractBundle::from_source(AUCTION).map_err(|e| e.to_string())?;
    let g = build_ptg(&taint_summary(&b));
    let d = DataDomain::new(2).unwrap();
    let m = Machine::network(&b, 4, d).map_err(|e| e.to_string())?;
    let mut actions = 0;
    let mut strict = 0;
    for a in m.actions() {
        let pt = semantic_pt(&b, 4, &a, d).map_err(|e| e.to_string())?;
        if let Some(e) = pt.uncovered(&g).next() {
            return Err(format!(
                "{}: address {} is not covered",
                a.describe(&b),
                e.address
            ));
        }
        strict += pt.strict_violations(&g).len();
        actions += 1;
    }
    within(start, Duration::from_secs(600), "participation search")?;
    ensure(actions == 40, || format!("{actions} actions"))?;
    Ok(format!(
        "{actions} actions covered in {:.1?} ({strict} clause-by-clause coincidences)",
        start.elapsed()
    ))
}

fn random_state(
    rng: &mut StdRng,
    m: &Machine,
    actions: &[msolv_core::semantics::Action],
) -> BundleState {
    if rng.gen_bool(0.5) {
        let mut s = m.init_state();
        for _ in 0..rng.gen_range(0..12) {
            s = m
                .step(&s, &actions[rng.gen_range(0..actions.len())])
                .unwrap();
            if s.is_error() {
                break;
            }
        }
        return s;
    }
    let layout = &m.bundle().layout;
    let n = m.addresses().len() as u64;
    let max = m.domain().max();
    BundleState {
        control: Control::Live(ControlState {
            roles: (0..layout.roles.len())
                .map(|_| rng.gen_range(0..n))
                .collect(),
            data: (0..layout.data.len())
                .map(|i| {
                    if layout.data_is_bool(i) {
                        rng.gen_range(0..=1)
                    } else {
                        rng.gen_range(0..=max)
                    }
                })
                .collect(),
            ctor_done: rng.gen_bool(0.9),
        }),
        users: m
            .addresses()
            .iter()
            .map(|&id| UserRecord {
                id,
                maps: (0..layout.maps.len())
                    .map(|_| rng.gen_range(0..=max))
                    .collect(),
            })
            .collect(),
    }
}

fn c7_swap() -> Outcome1 {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut cases = 0;
    for src in [AUCTION, AUCTION_SUM] {
        let b = ContractBundle::from_source(src).map_err(|e| e.to_string())?;
        let m = Machine::network(&b, 6, DataDomain::new(2).unwrap()).map_err(|e| e.to_string())?;
        let actions: Vec<_> = m.actions().collect();
        for _ in 0..5_000 {
            let s = random_state(&mut rng, &m, &actions);
            if s.is_error() {
                continue;
            }
            let p = &actions[rng.gen_range(0..actions.len())];
            let x = rng.gen_range(2..6);
            let y = rng.gen_range(2..6);
            let lhs = m
                .step(&swap_state(&s, x, y), &swap_action(p, x, y))
                .map_err(|e| e.to_string())?;
            let rhs = swap_state(&m.step(&s, p).map_err(|e| e.to_string())?, x, y);
            ensure(lhs == rhs, || {
                format!("swap {x}<->{y} breaks {} from {s:?}", p.describe(&b))
            })?;
            cases += 1;
        }
    }
    within(start, Duration::from_secs(60), "swap cases")?;
    ensure(cases >= 10_000, || format!("only {cases} cases"))?;
    Ok(format!("{cases} cases commute"))
}

fn c8_replay(ev: &Evidence) -> Outcome1 {
    ensure(!ev.traces.is_empty(), || "no traces were produced".into())?;
    for (name, bundle, trace, theta, d) in &ev.traces {
        replay(bundle, trace, theta.as_ref(), *d).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} traces replay", ev.traces.len()))
}

fn main() {
    let mut ev = Evidence {
        safe: Vec::new(),
        traces: Vec::new(),
    };
    let mut results: Vec<(u32, &str, Outcome1)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome1| {
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} criterion {id} ({name}): {detail}");
        results.push((id, name, r));
    };
    run(1, "auction pipeline", &mut c1_auction_pipeline);
    run(2, "saturating neighbourhood", &mut c2_neighbourhood);
    run(3, "compositionality", &mut || c3_compositionality(&mut ev));
    run(4, "guarded properties", &mut || c4_properties(&mut ev));
    run(5, "oracle agreement", &mut || c5_oracle(&mut ev));
    run(6, "participation coverage", &mut c6_participation);
    run(7, "swap commutation", &mut c7_swap);
    run(8, "trace replay", &mut || c8_replay(&ev));
    let failed = results.iter().filter(|r| r.2.is_err()).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
