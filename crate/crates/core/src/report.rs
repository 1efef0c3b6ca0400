//! JSON and text renderings of verdicts and states.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::checker::{Outcome, Trace, Verdict};
use crate::frontend::ContractBundle;
use crate::semantics::{Action, BundleState, Control};

pub fn action_json(bundle: &ContractBundle, action: &Action) -> Value {
    json!({
        "tx": bundle.tx_name(action.tx),
        "clients": action.clients,
        "args": action.args,
        "text": action.describe(bundle),
    })
}

pub fn state_json(state: &BundleState) -> Value {
    serde_json::to_value(state).expect("states serialize")
}

fn trace_json(bundle: &ContractBundle, trace: &Trace) -> Value {
    let mut steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| json!({"state": state_json(&s.state), "action": action_json(bundle, &s.action)}))
        .collect();
    steps.push(json!({"state": state_json(&trace.last), "action": null}));
    Value::Array(steps)
}

/// The verdict as JSON. Wall-clock time is reported only with `timing`, so
/// that identical runs produce identical output.
pub fn verdict_json(bundle: &ContractBundle, verdict: &Verdict, timing: bool) -> Value {
    let stats = &verdict.stats;
    let mut out = json!({
        "result": verdict.result_name(),
        "stats": {
            "states": stats.states,
            "transitions": stats.transitions,
            "seconds": if timing { stats.seconds } else { 0.0 },
        },
    });
    let obj = out.as_object_mut().expect("object literal");
    match &verdict.outcome {
        Outcome::Safe { invariant } => {
            obj.insert(
                "invariant".into(),
                serde_json::to_value(invariant).expect("controls serialize"),
            );
        }
        Outcome::CexToInvariant { trace, user } => {
            obj.insert("trace".into(), trace_json(bundle, trace));
            obj.insert("violation".into(), json!({ "user": user }));
        }
        Outcome::CexToProperty {
            trace,
            property,
            users,
        } => {
            obj.insert("trace".into(), trace_json(bundle, trace));
            obj.insert(
                "violation".into(),
                json!({ "property": property, "users": users }),
            );
        }
        Outcome::Exhausted => {}
    }
    out
}

/// One line: named control values, then each user's map values.
pub fn state_text(bundle: &ContractBundle, state: &BundleState) -> String {
    let layout = &bundle.layout;
    let mut s = String::new();
    match &state.control {
        Control::Error => s.push_str("<error>"),
        Control::Live(c) => {
            let vars = layout
                .roles
                .iter()
                .zip(&c.roles)
                .chain(layout.data.iter().zip(&c.data));
            let parts: Vec<String> = vars.map(|(slot, v)| format!("{}={v}", slot.name)).collect();
            s.push_str(&parts.join(" "));
            if !c.ctor_done {
                s.push_str(" (not constructed)");
            }
        }
    }
    for (m, slot) in layout.maps.iter().enumerate() {
        let cells: Vec<String> = state
            .users
            .iter()
            .map(|u| format!("{}:{}", u.id, u.maps[m]))
            .collect();
        let _ = write!(s, " | {} {}", slot.name, cells.join(" "));
    }
    s
}

fn trace_text(bundle: &ContractBundle, trace: &Trace, out: &mut String) {
    let _ = writeln!(out, "addresses: {:?}", trace.addresses);
    for (i, step) in trace.steps.iter().enumerate() {
        let _ = writeln!(out, "  state   {}", state_text(bundle, &step.state));
        let _ = writeln!(out, "{:>3}. {}", i + 1, step.action.describe(bundle));
    }
    let _ = writeln!(out, "  final   {}", state_text(bundle, &trace.last));
}

pub fn verdict_text(bundle: &ContractBundle, verdict: &Verdict, timing: bool) -> String {
    let mut out = format!("result: {}\n", verdict.result_name());
    match &verdict.outcome {
        Outcome::Safe { invariant } => {
            let _ = writeln!(out, "reachable control states: {}", invariant.len());
        }
        Outcome::CexToInvariant { trace, user } => {
            let _ = writeln!(
                out,
                "invariant fails for user {}",
                trace.last.users[*user].id
            );
            trace_text(bundle, trace, &mut out);
        }
        Outcome::CexToProperty {
            trace,
            property,
            users,
        } => {
            match property {
                None => out.push_str("the error state is reachable\n"),
                Some(p) => {
                    let ids: Vec<u64> = users.iter().map(|&u| trace.last.users[u].id).collect();
                    let _ = writeln!(out, "property {p} fails for users {ids:?}");
                }
            }
            trace_text(bundle, trace, &mut out);
        }
        Outcome::Exhausted => out.push_str("budget exhausted before the search finished\n"),
    }
    let s = &verdict.stats;
    let _ = write!(out, "states: {}  transitions: {}", s.states, s.transitions);
    if timing {
        let _ = write!(out, "  seconds: {:.3}", s.seconds);
    }
    out.push('\n');
    out
}
