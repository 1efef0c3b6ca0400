//! Address-oblivious predicates, guarded universal safety properties and
//! split interference invariants, plus the S-expression spec format.
//!
//! ```text
//! (invariant (lit 0 (= (map 0 bids) 0)) (else true))
//! (property (k 1) (guard-lit 0 slot 0) (xi (= (map 0 bids) 0)))
//! ```

mod pred;
mod sexpr;
mod spec;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::semantics::{ControlState, UserRecord};

pub use pred::{Formula, Rel, Term};
pub use spec::parse_spec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{0}")]
    Binding(String),
}

/// `∀` distinct users `u_0..u_{k-1}`: if every guard holds, `xi` holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedProperty {
    pub k: usize,
    /// `(address, slot)`: user in `slot` has this literal address.
    pub lits: Vec<(u64, usize)>,
    /// `(role, slot)`: user in `slot` holds this role.
    pub roles: Vec<(usize, usize)>,
    pub xi: Formula,
}

/// Per-user invariant split by who the user is: a literal address, a role
/// holder, or anyone else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitInvariant {
    pub lits: Vec<(u64, Formula)>,
    pub roles: Vec<(usize, Formula)>,
    pub else_pred: Formula,
}

impl Default for SplitInvariant {
    fn default() -> Self {
        Self {
            lits: Vec::new(),
            roles: Vec::new(),
            else_pred: Formula::True,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    pub properties: Vec<GuardedProperty>,
    /// Defaults to `(else true)` when the file has none.
    pub invariant: SplitInvariant,
    pub warnings: Vec<String>,
}

impl GuardedProperty {
    pub fn lit_guards(&self) -> BTreeSet<u64> {
        self.lits.iter().map(|g| g.0).collect()
    }

    pub fn role_guards(&self) -> BTreeSet<usize> {
        self.roles.iter().map(|g| g.0).collect()
    }

    fn slot_admits(&self, control: &ControlState, slot: usize, user: &UserRecord) -> bool {
        self.lits.iter().all(|&(a, s)| s != slot || user.id == a)
            && self
                .roles
                .iter()
                .all(|&(r, s)| s != slot || control.roles[r] == user.id)
    }
}

impl SplitInvariant {
    pub fn lit_guards(&self) -> BTreeSet<u64> {
        self.lits.iter().map(|g| g.0).collect()
    }

    pub fn role_guards(&self) -> BTreeSet<usize> {
        self.roles.iter().map(|g| g.0).collect()
    }
}

impl fmt::Display for GuardedProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(property (k {})", self.k)?;
        for (a, s) in &self.lits {
            write!(f, " (guard-lit {a} slot {s})")?;
        }
        for (r, s) in &self.roles {
            write!(f, " (guard-role {r} slot {s})")?;
        }
        write!(f, " (xi {}))", self.xi)
    }
}

impl fmt::Display for SplitInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(invariant")?;
        for (a, z) in &self.lits {
            write!(f, " (lit {a} {z})")?;
        }
        for (r, m) in &self.roles {
            write!(f, " (role {r} {m})")?;
        }
        write!(f, " (else {}))", self.else_pred)
    }
}

/// Value of `phi` on one tuple of users: guards imply `xi`.
pub fn eval_guarded(phi: &GuardedProperty, control: &ControlState, users: &[&UserRecord]) -> bool {
    let guarded = (0..phi.k).all(|s| phi.slot_admits(control, s, users[s]));
    !guarded || phi.xi.eval(control, users)
}

/// Checks `phi` on every ordered tuple of distinct users, in lexicographic
/// order of slot indices. Returns the first violating tuple.
pub fn check_universal(
    phi: &GuardedProperty,
    control: &ControlState,
    users: &[UserRecord],
) -> Result<(), Vec<usize>> {
    if users.len() < phi.k {
        return Ok(());
    }
    // Candidates per slot, already filtered by that slot's guards; a tuple
    // outside them satisfies the implication vacuously.
    let candidates: Vec<Vec<usize>> = (0..phi.k)
        .map(|s| {
            (0..users.len())
                .filter(|&i| phi.slot_admits(control, s, &users[i]))
                .collect()
        })
        .collect();
    let mut tuple = Vec::with_capacity(phi.k);
    let mut refs = Vec::with_capacity(phi.k);
    if search(phi, control, users, &candidates, &mut tuple, &mut refs) {
        Ok(())
    } else {
        Err(tuple)
    }
}

fn search<'u>(
    phi: &GuardedProperty,
    control: &ControlState,
    users: &'u [UserRecord],
    candidates: &[Vec<usize>],
    tuple: &mut Vec<usize>,
    refs: &mut Vec<&'u UserRecord>,
) -> bool {
    let slot = tuple.len();
    if slot == phi.k {
        return phi.xi.eval(control, refs);
    }
    for &i in &candidates[slot] {
        if tuple.contains(&i) {
            continue;
        }
        tuple.push(i);
        refs.push(&users[i]);
        if !search(phi, control, users, candidates, tuple, refs) {
            return false;
        }
        tuple.pop();
        refs.pop();
    }
    true
}

/// Value of the split invariant on one user: each literal or role clause
/// whose guard matches must hold, and if none matches, the else clause.
pub fn eval_split(theta: &SplitInvariant, control: &ControlState, user: &UserRecord) -> bool {
    let users = [user];
    let mut matched = false;
    for (a, z) in &theta.lits {
        if user.id == *a {
            matched = true;
            if !z.eval(control, &users) {
                return false;
            }
        }
    }
    for (r, m) in &theta.roles {
        if control.roles[*r] == user.id {
            matched = true;
            if !m.eval(control, &users) {
                return false;
            }
        }
    }
    matched || theta.else_pred.eval(control, &users)
}

/// First user violating the invariant.
pub fn check_split(
    theta: &SplitInvariant,
    control: &ControlState,
    users: &[UserRecord],
) -> Option<usize> {
    users.iter().position(|u| !eval_split(theta, control, u))
}
