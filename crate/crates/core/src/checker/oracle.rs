use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::frontend::ContractBundle;
use crate::properties::{check_split, check_universal, GuardedProperty, SplitInvariant};
use crate::semantics::{BundleState, Machine};

use super::{CheckConfig, CheckError, Outcome, Stats, Trace, TraceStep, Verdict};

/// Breadth-first search of the `n`-user network with addresses `0..n`.
///
/// Every reachable state is checked against `theta` (if given) user by user
/// and against each property; reaching the error state violates the
/// properties too.
pub fn global_oracle(
    bundle: &ContractBundle,
    n: usize,
    theta: Option<&SplitInvariant>,
    properties: &[GuardedProperty],
    config: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let pool = config.pool()?;
    pool.install(|| {
        let m = Machine::network(bundle, n, config.domain)?;
        let actions: Vec<_> = m.actions().collect();
        let start = Instant::now();
        let mut stats = Stats::default();
        let finish = |outcome, mut stats: Stats| {
            stats.seconds = start.elapsed().as_secs_f64();
            Ok(Verdict { outcome, stats })
        };

        // Each state with its parent index and the action leading to it.
        let mut states: Vec<(BundleState, Option<(usize, usize)>)> = vec![(m.init_state(), None)];
        let mut index: HashMap<BundleState, usize> = HashMap::from([(m.init_state(), 0)]);
        stats.states = 1;
        let trace_to = |states: &[(BundleState, Option<(usize, usize)>)], mut at: usize| {
            let last = states[at].0.clone();
            let mut steps = Vec::new();
            while let Some((parent, action)) = states[at].1 {
                steps.push(TraceStep {
                    state: states[parent].0.clone(),
                    action: actions[action].clone(),
                });
                at = parent;
            }
            steps.reverse();
            Trace {
                addresses: m.addresses().to_vec(),
                steps,
                last,
            }
        };

        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            for &s in &frontier {
                let state = &states[s].0;
                let Some(c) = state.live() else {
                    let trace = trace_to(&states, s);
                    return finish(
                        Outcome::CexToProperty {
                            trace,
                            property: None,
                            users: Vec::new(),
                        },
                        stats,
                    );
                };
                if let Some(user) = theta.and_then(|t| check_split(t, c, &state.users)) {
                    let trace = trace_to(&states, s);
                    return finish(Outcome::CexToInvariant { trace, user }, stats);
                }
                for (p, phi) in properties.iter().enumerate() {
                    if let Err(users) = check_universal(phi, c, &state.users) {
                        let trace = trace_to(&states, s);
                        return finish(
                            Outcome::CexToProperty {
                                trace,
                                property: Some(p),
                                users,
                            },
                            stats,
                        );
                    }
                }
            }
            if start.elapsed() > config.budget_time {
                return finish(Outcome::Exhausted, stats);
            }

            let successors: Vec<Vec<BundleState>> = frontier
                .par_iter()
                .map(|&s| {
                    actions
                        .iter()
                        .map(|a| m.step(&states[s].0, a))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?;
            let mut next = Vec::new();
            for (&s, succ) in frontier.iter().zip(successors) {
                for (a, t) in succ.into_iter().enumerate() {
                    stats.transitions += 1;
                    if index.contains_key(&t) {
                        continue;
                    }
                    if stats.states >= config.budget_states {
                        return finish(Outcome::Exhausted, stats);
                    }
                    index.insert(t.clone(), states.len());
                    next.push(states.len());
                    states.push((t, Some((s, a))));
                    stats.states += 1;
                }
            }
            frontier = next;
        }

        let mut invariant: Vec<_> = states
            .iter()
            .filter_map(|(s, _)| s.live().cloned())
            .collect();
        invariant.sort();
        invariant.dedup();
        finish(Outcome::Safe { invariant }, stats)
    })
}
