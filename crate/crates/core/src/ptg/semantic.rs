use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::frontend::ContractBundle;
use crate::semantics::{
    Action, BundleState, Control, ControlState, DataDomain, Machine, ReadSet, UserRecord,
};

use super::{Label, PtError, PtGraph};

/// Largest number of transaction executions a single [`semantic_pt`] call
/// may perform.
pub const DEFAULT_PT_BUDGET: u64 = 50_000_000;

/// One participation of `address`, with the clients and roles equal to it
/// in the witness.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Participation {
    pub address: u64,
    pub clients: Vec<usize>,
    pub roles: Vec<usize>,
}

/// Participants of one action, found by exhaustive search over witnesses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SemanticPt {
    /// `(client index, address)`.
    pub explicit: BTreeSet<(usize, u64)>,
    /// `(role index, address)`.
    pub transient: BTreeSet<(usize, u64)>,
    pub implicit: BTreeSet<u64>,
    pub events: BTreeSet<Participation>,
}

impl SemanticPt {
    fn record(&mut self, action: &Action, control: &ControlState, address: u64) {
        let clients: Vec<usize> = (0..action.clients.len())
            .filter(|&k| action.clients[k] == address)
            .collect();
        let roles: Vec<usize> = (0..control.roles.len())
            .filter(|&r| control.roles[r] == address)
            .collect();
        self.explicit.extend(clients.iter().map(|&k| (k, address)));
        self.transient.extend(roles.iter().map(|&r| (r, address)));
        if clients.is_empty() && roles.is_empty() {
            self.implicit.insert(address);
        }
        self.events.insert(Participation {
            address,
            clients,
            roles,
        });
    }

    fn merge(mut self, other: Self) -> Self {
        self.explicit.extend(other.explicit);
        self.transient.extend(other.transient);
        self.implicit.extend(other.implicit);
        self.events.extend(other.events);
        self
    }

    /// Participations for which the graph has no edge label naming any of
    /// their causes: a matching client, a matching role, or an implicit
    /// class for the address.
    pub fn uncovered<'a>(&'a self, g: &'a PtGraph) -> impl Iterator<Item = &'a Participation> {
        self.events.iter().filter(move |e| {
            let explicit = e
                .clients
                .iter()
                .any(|&k| g.covers(e.address, Label::Explicit(k)));
            let transient = e
                .roles
                .iter()
                .any(|&r| g.covers(e.address, Label::Transient(r)));
            !(explicit || transient || g.covers_implicit(e.address))
        })
    }

    /// Every class member the graph fails to label, read clause by clause:
    /// each explicit pair needs its explicit label, each transient pair its
    /// transient label, each implicit address an implicit label.
    pub fn strict_violations(&self, g: &PtGraph) -> Vec<String> {
        let mut out = Vec::new();
        for &(k, a) in &self.explicit {
            if !g.covers(a, Label::Explicit(k)) {
                out.push(format!("explicit@{k} for address {a}"));
            }
        }
        for &(r, a) in &self.transient {
            if !g.covers(a, Label::Transient(r)) {
                out.push(format!("transient@{r} for address {a}"));
            }
        }
        for &a in &self.implicit {
            if !g.covers_implicit(a) {
                out.push(format!("implicit for address {a}"));
            }
        }
        out
    }
}

/// Odometer over vectors whose digit `i` ranges over `0..=max[i]`.
fn odometer(max: &[u64]) -> impl Iterator<Item = Vec<u64>> + '_ {
    let mut next = Some(vec![0; max.len()]);
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut n = cur.clone();
        for pos in (0..n.len()).rev() {
            if n[pos] < max[pos] {
                n[pos] += 1;
                next = Some(n);
                return Some(cur);
            }
            n[pos] = 0;
        }
        Some(cur)
    })
}

fn count(max: &[u64]) -> u64 {
    max.iter()
        .fold(1u64, |acc, &m| acc.saturating_mul(m.saturating_add(1)))
}

/// Brute-force participation topology of `action` in the `n`-user bundle.
///
/// Witness configurations `u` give user `i` the address `i`, as every state
/// of the `n`-user bundle does. A user `i` participates if some alternative
/// record for user `i` alone (any address, any map values) changes the
/// outcome for the rest of the network, or if the action changes user `i`'s
/// record. Control states range over all role assignments and data values
/// after construction, and over the zero state before it.
pub fn semantic_pt(
    bundle: &ContractBundle,
    n: usize,
    action: &Action,
    domain: DataDomain,
) -> Result<SemanticPt, PtError> {
    semantic_pt_with_budget(bundle, n, action, domain, DEFAULT_PT_BUDGET)
}

pub fn semantic_pt_with_budget(
    bundle: &ContractBundle,
    n: usize,
    action: &Action,
    domain: DataDomain,
    budget: u64,
) -> Result<SemanticPt, PtError> {
    let m = Machine::network(bundle, n, domain)?;
    let layout = &bundle.layout;
    let top = n as u64 - 1;
    let d = domain.max();

    let control_max: Vec<u64> = std::iter::repeat_n(top, layout.roles.len())
        .chain((0..layout.data.len()).map(|i| if layout.data_is_bool(i) { 1 } else { d }))
        .collect();
    let map_max = vec![d; n * layout.maps.len()];
    let alt_max: Vec<u64> = std::iter::once(top)
        .chain(std::iter::repeat_n(d, layout.maps.len()))
        .collect();
    let per_config = 1 + (n as u64).saturating_mul(count(&alt_max));
    let total = count(&control_max)
        .saturating_add(1)
        .saturating_mul(count(&map_max))
        .saturating_mul(per_config);
    if total > budget {
        return Err(PtError::BudgetExceeded {
            needed: total,
            budget,
        });
    }

    let n_roles = layout.roles.len();
    let mut controls = vec![ControlState::zero(n_roles, layout.data.len())];
    controls.extend(odometer(&control_max).map(|v| ControlState {
        roles: v[..n_roles].to_vec(),
        data: v[n_roles..].to_vec(),
        ctor_done: true,
    }));
    let n_maps = layout.maps.len();
    let alternatives: Vec<UserRecord> = odometer(&alt_max)
        .map(|v| UserRecord {
            id: v[0],
            maps: v[1..].to_vec(),
        })
        .collect();

    controls
        .par_iter()
        .map(|control| {
            let mut pt = SemanticPt::default();
            let mut reads = ReadSet::default();
            for maps in odometer(&map_max) {
                let state = BundleState {
                    control: Control::Live(control.clone()),
                    users: (0..n)
                        .map(|i| UserRecord {
                            id: i as u64,
                            maps: maps[i * n_maps..(i + 1) * n_maps].to_vec(),
                        })
                        .collect(),
                };
                let post = m.execute(&state, action, &mut reads)?.apply(&state);
                for i in 0..n {
                    if post.users[i] != state.users[i] {
                        pt.record(action, control, i as u64);
                    }
                }
                let mut alt = state.clone();
                for i in 0..n {
                    for v in &alternatives {
                        if *v == state.users[i] {
                            continue;
                        }
                        alt.users[i] = v.clone();
                        let alt_post = m.execute(&alt, action, &mut reads)?.apply(&alt);
                        let differs = alt_post.control != post.control
                            || (0..n).any(|j| j != i && alt_post.users[j] != post.users[j]);
                        if differs {
                            pt.record(action, control, i as u64);
                            break;
                        }
                    }
                    alt.users[i] = state.users[i].clone();
                }
            }
            Ok(pt)
        })
        .try_reduce(SemanticPt::default, |a, b| Ok(a.merge(b)))
}
