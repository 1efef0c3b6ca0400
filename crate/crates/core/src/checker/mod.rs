//! Explicit-state model checking of local bundles.
//!
//! [`check_compositional`] decides whether a split invariant is preserved
//! by every transaction of the local bundle over the saturating
//! neighbourhood plus one fresh user. [`check_safety`] then checks guarded
//! properties on the local bundle sized for the property. Both explore
//! havoced states lazily: a havoced node stands for every user assignment
//! the invariant allows at its control state, and only the users a
//! transaction reads are enumerated. [`global_oracle`] is a plain BFS over
//! the `N`-user network used to cross-check verdicts.

mod local;
mod oracle;
mod replay;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::frontend::ContractBundle;
use crate::localization::{saturating_neighbourhood, Extension, Neighbourhood};
use crate::properties::{GuardedProperty, SplitInvariant};
use crate::ptg::PtGraph;
use crate::semantics::{Action, BundleState, ControlState, DataDomain, SemanticsError};

pub use oracle::global_oracle;
pub use replay::{replay, ReplayError};

pub const DEFAULT_BUDGET_STATES: u64 = 10_000_000;
pub const DEFAULT_BUDGET_SECS: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub domain: DataDomain,
    pub budget_states: u64,
    pub budget_time: Duration,
    /// Worker threads; `None` uses `MSOLV_THREADS` or all cores.
    pub threads: Option<usize>,
}

impl CheckConfig {
    pub fn new(domain: DataDomain) -> Self {
        Self {
            domain,
            budget_states: DEFAULT_BUDGET_STATES,
            budget_time: Duration::from_secs(DEFAULT_BUDGET_SECS),
            threads: None,
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CheckError> {
        let threads = self.threads.or_else(|| {
            std::env::var("MSOLV_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        });
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CheckError::ThreadPool(e.to_string()))
    }
}

/// A counterexample: states `x_0 .. x_{n-1}` with the action taken from
/// each, then the violating state.
///
/// In a local bundle each `x_{j+1}` is one of the havoced successors of
/// running action `j` on `x_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub addresses: Vec<u64>,
    pub steps: Vec<TraceStep>,
    pub last: BundleState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub state: BundleState,
    pub action: Action,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Stats {
    /// Stored nodes: concrete states, plus havoced control states in local
    /// checks.
    pub states: u64,
    pub transitions: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Carries the reachable control states, an inductive invariant.
    Safe {
        invariant: Vec<ControlState>,
    },
    /// `user` of the last state breaks the split invariant.
    CexToInvariant {
        trace: Trace,
        user: usize,
    },
    /// The last state is the error state, or `property` fails on `users`.
    CexToProperty {
        trace: Trace,
        property: Option<usize>,
        users: Vec<usize>,
    },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: Stats,
}

impl Verdict {
    pub fn is_safe(&self) -> bool {
        matches!(self.outcome, Outcome::Safe { .. })
    }

    pub fn trace(&self) -> Option<&Trace> {
        match &self.outcome {
            Outcome::CexToInvariant { trace, .. } | Outcome::CexToProperty { trace, .. } => {
                Some(trace)
            }
            _ => None,
        }
    }

    pub fn result_name(&self) -> &'static str {
        match self.outcome {
            Outcome::Safe { .. } => "safe",
            Outcome::CexToInvariant { .. } => "cex_invariant",
            Outcome::CexToProperty { .. } => "cex_property",
            Outcome::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("the invariant is not compositional ({0}); properties cannot be checked against it")]
    PreconditionUnmet(&'static str),
    #[error("property guard names address {0}, which is outside the neighbourhood")]
    GuardOutsideNeighbourhood(u64),
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Neighbourhood used to check `theta` for compositionality.
pub fn compositional_neighbourhood(ptg: &PtGraph, theta: &SplitInvariant) -> Neighbourhood {
    saturating_neighbourhood(ptg, &theta.role_guards(), &theta.lit_guards())
}

/// Neighbourhood used to check `phi` under `theta`: guards of both.
pub fn safety_neighbourhood(
    ptg: &PtGraph,
    theta: &SplitInvariant,
    phi: &GuardedProperty,
) -> Neighbourhood {
    let mut roles = theta.role_guards();
    roles.extend(phi.role_guards());
    let mut lits = theta.lit_guards();
    lits.extend(phi.lit_guards());
    saturating_neighbourhood(ptg, &roles, &lits)
}

/// Whether `theta` is an interference invariant: no reachable state of the
/// local bundle over the neighbourhood plus one fresh user breaks it.
pub fn check_compositional(
    bundle: &ContractBundle,
    ptg: &PtGraph,
    theta: &SplitInvariant,
    config: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let addresses = compositional_neighbourhood(ptg, theta).extend(Extension::Compositionality);
    local::explore(bundle, &addresses, theta, None, config)
}

/// Checks `phi` on the local bundle sized for it. `theta` must pass
/// [`check_compositional`] first; that check is rerun here.
pub fn check_safety(
    bundle: &ContractBundle,
    ptg: &PtGraph,
    theta: &SplitInvariant,
    phi: &GuardedProperty,
    config: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let pre = check_compositional(bundle, ptg, theta, config)?;
    if !pre.is_safe() {
        return Err(CheckError::PreconditionUnmet(pre.result_name()));
    }
    check_safety_unchecked(bundle, ptg, theta, phi, config)
}

/// [`check_safety`] without the compositionality precondition, for callers
/// that already established it.
pub fn check_safety_unchecked(
    bundle: &ContractBundle,
    ptg: &PtGraph,
    theta: &SplitInvariant,
    phi: &GuardedProperty,
    config: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let addresses = safety_neighbourhood(ptg, theta, phi).extend(Extension::Safety(phi.k));
    if let Some(&a) = phi.lit_guards().iter().find(|a| !addresses.contains(a)) {
        return Err(CheckError::GuardOutsideNeighbourhood(a));
    }
    local::explore(bundle, &addresses, theta, Some(phi), config)
}

#[cfg(test)]
mod tests;
