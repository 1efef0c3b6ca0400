//! Finite neighbourhoods of representative addresses and the local bundle
//! that runs a contract over them. After each step every user's map values
//! are havoced, subject to a split interference invariant.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::frontend::ContractBundle;
use crate::properties::{eval_split, SplitInvariant};
use crate::ptg::{Label, PtGraph};
use crate::semantics::{
    Action, BundleState, Control, ControlState, DataDomain, Machine, SemanticsError, UserRecord,
};

/// Representative addresses, one per participation class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Neighbourhood {
    /// Stand-ins for explicit participants (clients).
    pub exp: BTreeSet<u64>,
    /// Stand-ins for role holders.
    pub trans: BTreeSet<u64>,
    /// Literal addresses.
    #[serde(rename = "impl")]
    pub imp: BTreeSet<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// One extra arbitrary user, to check that an invariant is preserved.
    Compositionality,
    /// Enough extra users to fill a `k`-user property.
    Safety(usize),
}

fn fresh(used: &BTreeSet<u64>, n: usize) -> Vec<u64> {
    (0u64..).filter(|a| !used.contains(a)).take(n).collect()
}

impl Neighbourhood {
    /// All addresses in ascending order.
    pub fn addresses(&self) -> Vec<u64> {
        let all: BTreeSet<u64> = self
            .exp
            .iter()
            .chain(&self.trans)
            .chain(&self.imp)
            .copied()
            .collect();
        all.into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.exp.len() + self.trans.len() + self.imp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The neighbourhood plus fresh addresses, smallest first.
    pub fn extend(&self, mode: Extension) -> Vec<u64> {
        let extra = match mode {
            Extension::Compositionality => 1,
            Extension::Safety(k) => k.saturating_sub(self.exp.len()),
        };
        let used: BTreeSet<u64> = self.addresses().into_iter().collect();
        let mut all = self.addresses();
        all.extend(fresh(&used, extra));
        all.sort_unstable();
        all
    }
}

/// Neighbourhood holding every literal class of the graph and the guards,
/// one address per transient class or guarded role, and one per explicit
/// class. Unassigned addresses are the smallest naturals not yet used.
pub fn saturating_neighbourhood(
    ptg: &PtGraph,
    role_guards: &BTreeSet<usize>,
    lit_guards: &BTreeSet<u64>,
) -> Neighbourhood {
    let labels = || ptg.edges.iter().flat_map(|e| e.labels.iter());
    let mut imp: BTreeSet<u64> = labels()
        .filter_map(|l| match l {
            Label::Implicit(a) => Some(*a),
            _ => None,
        })
        .collect();
    imp.extend(lit_guards);
    let explicit: BTreeSet<usize> = labels()
        .filter_map(|l| match l {
            Label::Explicit(i) => Some(*i),
            _ => None,
        })
        .collect();
    let mut transient: BTreeSet<usize> = labels()
        .filter_map(|l| match l {
            Label::Transient(r) => Some(*r),
            _ => None,
        })
        .collect();
    transient.extend(role_guards);

    let trans: BTreeSet<u64> = fresh(&imp, transient.len()).into_iter().collect();
    let used: BTreeSet<u64> = imp.union(&trans).copied().collect();
    let exp = fresh(&used, explicit.len()).into_iter().collect();
    Neighbourhood { exp, trans, imp }
}

/// Map values user `id` may hold at `control` under `theta`, in ascending
/// lexicographic order.
pub fn allowed_records(
    theta: &SplitInvariant,
    control: &ControlState,
    id: u64,
    n_maps: usize,
    domain: DataDomain,
) -> Vec<Vec<u64>> {
    let max = domain.max();
    let mut out = Vec::new();
    let mut cur = vec![0u64; n_maps];
    loop {
        let u = UserRecord {
            id,
            maps: cur.clone(),
        };
        if eval_split(theta, control, &u) {
            out.push(cur.clone());
        }
        let mut pos = n_maps;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] < max {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
    }
}

/// Every state with the same control and ids whose users all satisfy
/// `theta`, in ascending order.
pub fn interference_successors(
    theta: &SplitInvariant,
    state: &BundleState,
    domain: DataDomain,
) -> Vec<BundleState> {
    let Control::Live(control) = &state.control else {
        return vec![state.clone()];
    };
    let n_maps = state.users.first().map_or(0, |u| u.maps.len());
    let choices: Vec<Vec<Vec<u64>>> = state
        .users
        .iter()
        .map(|u| allowed_records(theta, control, u.id, n_maps, domain))
        .collect();
    if choices.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        out.push(BundleState {
            control: state.control.clone(),
            users: state
                .users
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(i, (u, &j))| UserRecord {
                    id: u.id,
                    maps: choices[i][j].clone(),
                })
                .collect(),
        });
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] + 1 < choices[pos].len() {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Whether every user of a live state satisfies `theta`.
pub fn satisfies(theta: &SplitInvariant, state: &BundleState) -> bool {
    match &state.control {
        Control::Live(c) => state.users.iter().all(|u| eval_split(theta, c, u)),
        Control::Error => false,
    }
}

/// One step of the local bundle over `addresses`: run the action, then
/// havoc every user under `theta` if the result satisfies it. A result that
/// breaks `theta`, or the error state, is returned alone.
pub fn local_step(
    bundle: &ContractBundle,
    addresses: &[u64],
    theta: &SplitInvariant,
    state: &BundleState,
    action: &Action,
    domain: DataDomain,
) -> Result<Vec<BundleState>, SemanticsError> {
    let m = Machine::new(bundle, addresses, domain)?;
    let post = m.step(state, action)?;
    if satisfies(theta, &post) {
        Ok(interference_successors(theta, &post, domain))
    } else {
        Ok(vec![post])
    }
}

#[cfg(test)]
mod tests;
