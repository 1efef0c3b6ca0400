use thiserror::Error;

use crate::frontend::ContractBundle;
use crate::localization::satisfies;
use crate::properties::SplitInvariant;
use crate::semantics::{BundleState, DataDomain, Machine, SemanticsError};

use super::Trace;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("the trace does not start in the initial state")]
    NotInitial,
    #[error("step {step} does not lead to the next state of the trace")]
    Diverges { step: usize },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Re-executes `trace` and checks every step.
///
/// Without `theta` each state must be the exact successor of the previous
/// one. With `theta` a state may also be any interference successor: same
/// control state and ids, with both the executed result and the state
/// itself satisfying `theta`.
pub fn replay(
    bundle: &ContractBundle,
    trace: &Trace,
    theta: Option<&SplitInvariant>,
    domain: DataDomain,
) -> Result<(), ReplayError> {
    let m = Machine::new(bundle, &trace.addresses, domain)?;
    let first = trace.steps.first().map_or(&trace.last, |s| &s.state);
    if *first != m.init_state() {
        return Err(ReplayError::NotInitial);
    }
    for (j, step) in trace.steps.iter().enumerate() {
        let y = m.step(&step.state, &step.action)?;
        let next = trace.steps.get(j + 1).map_or(&trace.last, |s| &s.state);
        if !follows(theta, &y, next) {
            return Err(ReplayError::Diverges { step: j });
        }
    }
    Ok(())
}

fn follows(theta: Option<&SplitInvariant>, y: &BundleState, next: &BundleState) -> bool {
    if y == next {
        return true;
    }
    let Some(theta) = theta else {
        return false;
    };
    y.control == next.control
        && y.ids().eq(next.ids())
        && satisfies(theta, y)
        && satisfies(theta, next)
}
