use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;

use crate::frontend::ContractBundle;
use crate::localization::allowed_records;
use crate::properties::{
    check_universal, eval_guarded, eval_split, GuardedProperty, SplitInvariant,
};
use crate::semantics::{
    Action, BundleState, Control, ControlState, Effect, Machine, ReadSet, UserRecord,
};

use super::{CheckConfig, CheckError, Outcome, Stats, Trace, TraceStep, Verdict};

/// A concrete state, or every state at a control state whose users all
/// satisfy the invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Concrete(BundleState),
    Havoc(ControlState),
}

/// Allowed records per slot, and the chosen record of each assigned slot.
type Free<'a> = (&'a [Vec<Vec<u64>>], &'a [Option<usize>]);

struct NodeInfo {
    node: Node,
    /// Parent node, action index and the concrete state of the parent the
    /// action was taken from.
    parent: Option<(usize, usize, BundleState)>,
}

enum Found {
    Next {
        node: Node,
        action: usize,
        pre: BundleState,
    },
    BadInvariant {
        action: usize,
        pre: BundleState,
        post: BundleState,
        user: usize,
    },
    BadState {
        action: usize,
        pre: BundleState,
        post: BundleState,
    },
}

/// A property violation inside a node's own family of states.
struct NodeViolation {
    state: BundleState,
    users: Vec<usize>,
}

struct Expansion {
    violation: Option<NodeViolation>,
    found: Vec<Found>,
    transitions: u64,
}

struct Engine<'a> {
    m: Machine<'a>,
    theta: &'a SplitInvariant,
    phi: Option<&'a GuardedProperty>,
    actions: Vec<Action>,
    n_maps: usize,
}

pub(super) fn explore(
    bundle: &ContractBundle,
    addresses: &[u64],
    theta: &SplitInvariant,
    phi: Option<&GuardedProperty>,
    config: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let pool = config.pool()?;
    pool.install(|| {
        let m = Machine::new(bundle, addresses, config.domain)?;
        let actions = m.actions().collect();
        let engine = Engine {
            m,
            theta,
            phi,
            actions,
            n_maps: bundle.layout.maps.len(),
        };
        engine.run(config)
    })
}

impl Engine<'_> {
    fn allowed(&self, control: &ControlState) -> Vec<Vec<Vec<u64>>> {
        self.m
            .addresses()
            .iter()
            .map(|&id| allowed_records(self.theta, control, id, self.n_maps, self.m.domain()))
            .collect()
    }

    fn build(
        &self,
        control: &ControlState,
        allowed: &[Vec<Vec<u64>>],
        assign: &[Option<usize>],
    ) -> BundleState {
        BundleState {
            control: Control::Live(control.clone()),
            users: self
                .m
                .addresses()
                .iter()
                .zip(assign)
                .enumerate()
                .map(|(i, (&id, a))| UserRecord {
                    id,
                    maps: allowed[i][a.unwrap_or(0)].clone(),
                })
                .collect(),
        }
    }

    fn trace(
        &self,
        nodes: &[NodeInfo],
        mut at: usize,
        tail: Option<(usize, BundleState)>,
        last: BundleState,
    ) -> Trace {
        let mut steps = Vec::new();
        if let Some((action, pre)) = tail {
            steps.push(TraceStep {
                state: pre,
                action: self.actions[action].clone(),
            });
        }
        while let Some((parent, action, pre)) = &nodes[at].parent {
            steps.push(TraceStep {
                state: pre.clone(),
                action: self.actions[*action].clone(),
            });
            at = *parent;
        }
        steps.reverse();
        Trace {
            addresses: self.m.addresses().to_vec(),
            steps,
            last,
        }
    }

    fn run(&self, config: &CheckConfig) -> Result<Verdict, CheckError> {
        let start = Instant::now();
        let mut stats = Stats::default();
        let finish = |outcome, mut stats: Stats| {
            stats.seconds = start.elapsed().as_secs_f64();
            Ok(Verdict { outcome, stats })
        };

        let s0 = self.m.init_state();
        let mut nodes = vec![NodeInfo {
            node: Node::Concrete(s0.clone()),
            parent: None,
        }];
        let mut index: HashMap<Node, usize> = HashMap::from([(Node::Concrete(s0.clone()), 0)]);
        stats.states = 1;
        let c0 = s0.live().expect("initial state is live");
        if let Some(user) = s0.users.iter().position(|u| !eval_split(self.theta, c0, u)) {
            let trace = self.trace(&nodes, 0, None, s0.clone());
            return finish(Outcome::CexToInvariant { trace, user }, stats);
        }

        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            if start.elapsed() > config.budget_time {
                return finish(Outcome::Exhausted, stats);
            }
            let expansions: Vec<Expansion> = frontier
                .par_iter()
                .map(|&n| self.expand(&nodes[n].node))
                .collect::<Result<_, _>>()?;

            for (&n, e) in frontier.iter().zip(&expansions) {
                if let Some(v) = &e.violation {
                    let trace = self.trace(&nodes, n, None, v.state.clone());
                    let outcome = Outcome::CexToProperty {
                        trace,
                        property: Some(0),
                        users: v.users.clone(),
                    };
                    return finish(outcome, stats);
                }
            }

            let mut next = Vec::new();
            for (&n, e) in frontier.iter().zip(expansions) {
                stats.transitions += e.transitions;
                for f in e.found {
                    match f {
                        Found::Next { node, action, pre } => {
                            if index.contains_key(&node) {
                                continue;
                            }
                            if stats.states >= config.budget_states {
                                return finish(Outcome::Exhausted, stats);
                            }
                            index.insert(node.clone(), nodes.len());
                            next.push(nodes.len());
                            nodes.push(NodeInfo {
                                node,
                                parent: Some((n, action, pre)),
                            });
                            stats.states += 1;
                        }
                        Found::BadInvariant {
                            action,
                            pre,
                            post,
                            user,
                        } => {
                            let trace = self.trace(&nodes, n, Some((action, pre)), post);
                            return finish(Outcome::CexToInvariant { trace, user }, stats);
                        }
                        // The error state has no invariant to break; only
                        // property checks report it.
                        Found::BadState { .. } if self.phi.is_none() => {}
                        Found::BadState { action, pre, post } => {
                            let trace = self.trace(&nodes, n, Some((action, pre)), post);
                            let outcome = Outcome::CexToProperty {
                                trace,
                                property: None,
                                users: Vec::new(),
                            };
                            return finish(outcome, stats);
                        }
                    }
                }
            }
            frontier = next;
        }

        let mut invariant: Vec<ControlState> = nodes
            .iter()
            .filter_map(|n| match &n.node {
                Node::Havoc(c) => Some(c.clone()),
                Node::Concrete(s) => s.live().cloned(),
            })
            .collect();
        invariant.sort();
        invariant.dedup();
        finish(Outcome::Safe { invariant }, stats)
    }

    fn expand(&self, node: &Node) -> Result<Expansion, CheckError> {
        let mut out = Expansion {
            violation: None,
            found: Vec::new(),
            transitions: 0,
        };
        match node {
            Node::Concrete(s) => {
                let c = s.live().expect("stored concrete states are live");
                if let Some(phi) = self.phi {
                    if let Err(users) = check_universal(phi, c, &s.users) {
                        out.violation = Some(NodeViolation {
                            state: s.clone(),
                            users,
                        });
                        return Ok(out);
                    }
                }
                let mut seen = HashSet::new();
                for a in 0..self.actions.len() {
                    let effect = self
                        .m
                        .execute(s, &self.actions[a], &mut ReadSet::default())?;
                    out.transitions += 1;
                    let found = match &effect {
                        Effect::Unchanged => Found::Next {
                            node: Node::Havoc(c.clone()),
                            action: a,
                            pre: s.clone(),
                        },
                        _ => self.settle(s, a, &effect, None),
                    };
                    push(&mut out.found, &mut seen, found);
                }
            }
            Node::Havoc(c) => {
                let allowed = self.allowed(c);
                if allowed.iter().any(Vec::is_empty) {
                    return Ok(out);
                }
                if let Some(phi) = self.phi {
                    if let Some(v) = self.havoc_violation(phi, c, &allowed) {
                        out.violation = Some(v);
                        return Ok(out);
                    }
                }
                let mut seen = HashSet::new();
                let mut assign = vec![None; allowed.len()];
                for a in 0..self.actions.len() {
                    self.branch(c, &allowed, &mut assign, a, &mut out, &mut seen)?;
                }
            }
        }
        Ok(out)
    }

    /// Enumerates values only for the users the action reads, depth first
    /// in slot order.
    fn branch(
        &self,
        c: &ControlState,
        allowed: &[Vec<Vec<u64>>],
        assign: &mut Vec<Option<usize>>,
        action: usize,
        out: &mut Expansion,
        seen: &mut HashSet<Node>,
    ) -> Result<(), CheckError> {
        let pre = self.build(c, allowed, assign);
        let mut reads = ReadSet::default();
        let effect = self.m.execute(&pre, &self.actions[action], &mut reads)?;
        if let Some(i) = reads.iter().find(|&i| assign[i].is_none()) {
            for k in 0..allowed[i].len() {
                assign[i] = Some(k);
                self.branch(c, allowed, assign, action, out, seen)?;
            }
            assign[i] = None;
            return Ok(());
        }
        out.transitions += 1;
        if effect == Effect::Unchanged {
            return Ok(());
        }
        let found = self.settle(&pre, action, &effect, Some((allowed, assign)));
        push(&mut out.found, seen, found);
        Ok(())
    }

    /// Classifies a changing step from `pre`. With `free`, users not yet
    /// assigned stand for every allowed value, and the step breaks the
    /// invariant if any of those values does.
    fn settle(
        &self,
        pre: &BundleState,
        action: usize,
        effect: &Effect,
        free: Option<Free<'_>>,
    ) -> Found {
        let post = effect.apply(pre);
        let Effect::Commit(commit) = effect else {
            return Found::BadState {
                action,
                pre: pre.clone(),
                post,
            };
        };
        let c2 = &commit.control;
        for (j, u) in post.users.iter().enumerate() {
            let is_free = free.is_some_and(|(_, assign)| assign[j].is_none());
            if !is_free {
                if !eval_split(self.theta, c2, u) {
                    return Found::BadInvariant {
                        action,
                        pre: pre.clone(),
                        post,
                        user: j,
                    };
                }
                continue;
            }
            let (allowed, _) = free.expect("free users come with their allowed values");
            for v in &allowed[j] {
                let mut cand = UserRecord {
                    id: u.id,
                    maps: v.clone(),
                };
                for w in commit.writes.iter().filter(|w| w.user == j) {
                    cand.maps[w.map] = w.value;
                }
                if !eval_split(self.theta, c2, &cand) {
                    let mut witness = pre.clone();
                    witness.users[j].maps = v.clone();
                    let post = self
                        .m
                        .step(&witness, &self.actions[action])
                        .expect("an unread user cannot change the outcome");
                    return Found::BadInvariant {
                        action,
                        pre: witness,
                        post,
                        user: j,
                    };
                }
            }
        }
        Found::Next {
            node: Node::Havoc(c2.clone()),
            action,
            pre: pre.clone(),
        }
    }

    /// First state of the havoced family at `c` that breaks `phi`, by tuple
    /// of distinct slots in lexicographic order, then by values.
    fn havoc_violation(
        &self,
        phi: &GuardedProperty,
        c: &ControlState,
        allowed: &[Vec<Vec<u64>>],
    ) -> Option<NodeViolation> {
        let ids = self.m.addresses();
        let n = ids.len();
        if n < phi.k {
            return None;
        }
        let admits = |slot: usize, i: usize| {
            phi.lits.iter().all(|&(a, s)| s != slot || ids[i] == a)
                && phi
                    .roles
                    .iter()
                    .all(|&(r, s)| s != slot || c.roles[r] == ids[i])
        };
        let mut tuple = vec![0usize; phi.k];
        let mut values = vec![0usize; phi.k];
        let pick = |tuple: &[usize], values: &[usize]| {
            let recs: Vec<UserRecord> = tuple
                .iter()
                .zip(values)
                .map(|(&i, &v)| UserRecord {
                    id: ids[i],
                    maps: allowed[i][v].clone(),
                })
                .collect();
            let refs: Vec<&UserRecord> = recs.iter().collect();
            !eval_guarded(phi, c, &refs)
        };
        // Odometer over slot tuples, then over value tuples.
        loop {
            let distinct = (0..phi.k).all(|a| (0..a).all(|b| tuple[a] != tuple[b]));
            if distinct && (0..phi.k).all(|s| admits(s, tuple[s])) {
                values.iter_mut().for_each(|v| *v = 0);
                loop {
                    if pick(&tuple, &values) {
                        let mut state = self.build(c, allowed, &vec![None; n]);
                        for (&i, &v) in tuple.iter().zip(&values) {
                            state.users[i].maps = allowed[i][v].clone();
                        }
                        return Some(NodeViolation {
                            state,
                            users: tuple.clone(),
                        });
                    }
                    if !odometer_step(&mut values, |p| allowed[tuple[p]].len()) {
                        break;
                    }
                }
            }
            if !odometer_step(&mut tuple, |_| n) {
                return None;
            }
        }
    }
}

fn odometer_step(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for p in (0..digits.len()).rev() {
        if digits[p] + 1 < radix(p) {
            digits[p] += 1;
            return true;
        }
        digits[p] = 0;
    }
    false
}

fn push(out: &mut Vec<Found>, seen: &mut HashSet<Node>, f: Found) {
    if let Found::Next { node, .. } = &f {
        if !seen.insert(node.clone()) {
            return;
        }
    }
    out.push(f);
}
