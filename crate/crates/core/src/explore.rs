//! Breadth-first construction of concurrent reachability graphs.
//!
//! Each BFS level is expanded with [`Exec::map`] and merged sequentially
//! in frontier order, so the resulting graph is identical under every
//! execution policy.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use crate::exec::Exec;
use crate::transition_system::{Arc, Step, StepTransitionSystem};

/// Bounds on reachability-graph exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self {
            max_states: 10_000,
            max_depth: 50,
        }
    }
}

impl ExploreLimits {
    pub fn new(max_states: usize, max_depth: usize) -> Self {
        Self {
            max_states,
            max_depth,
        }
    }

    pub fn depth(max_depth: usize) -> Self {
        Self {
            max_depth,
            ..Self::default()
        }
    }

    pub(crate) fn is_valid(&self) -> bool {
        self.max_states > 0 && self.max_depth > 0
    }
}

/// A concurrent reachability graph together with the model states behind
/// its nodes (`states[i]` is the marking or configuration of
/// `ts.states()[i]`).
#[derive(Debug, Clone)]
pub struct Exploration<S> {
    pub ts: StepTransitionSystem,
    pub states: Vec<S>,
    /// Some discovered state with enabled steps was left unexpanded.
    pub truncated: bool,
}

pub(crate) trait StateSpace: Sync {
    type State: Clone + Eq + Hash + Send + Sync;
    type Error: Send;

    fn initial(&self) -> Self::State;
    fn successors(&self, s: &Self::State) -> Result<Vec<(Step, Self::State)>, Self::Error>;
    fn state_id(&self, s: &Self::State) -> String;
}

pub(crate) fn explore<X: StateSpace>(
    space: &X,
    limits: ExploreLimits,
    exec: Exec,
) -> Result<Exploration<X::State>, X::Error> {
    let init = space.initial();
    let mut states = vec![init.clone()];
    let mut index: HashMap<X::State, usize> = HashMap::from([(init, 0)]);
    let mut arcs: Vec<(usize, Step, usize)> = Vec::new();
    let mut frontier = vec![0usize];
    let mut depth = 0;
    let mut truncated = false;

    while !frontier.is_empty() {
        let level: Vec<&X::State> = frontier.iter().map(|&i| &states[i]).collect();
        let expanded = exec.map(&level, |s| space.successors(s));
        let expanded: Vec<_> = expanded.into_iter().collect::<Result<_, _>>()?;

        if depth >= limits.max_depth {
            truncated = expanded.iter().any(|succ| !succ.is_empty());
            break;
        }

        let mut next = Vec::new();
        let mut stopped = false;
        for (&q, succ) in frontier.iter().zip(expanded) {
            if stopped {
                truncated |= !succ.is_empty();
                continue;
            }
            let distinct_new: HashSet<&X::State> = succ
                .iter()
                .map(|(_, s)| s)
                .filter(|s| !index.contains_key(*s))
                .collect();
            if states.len() + distinct_new.len() > limits.max_states {
                stopped = true;
                truncated = true;
                continue;
            }
            for (step, s) in succ {
                let target = match index.get(&s) {
                    Some(&t) => t,
                    None => {
                        let t = states.len();
                        index.insert(s.clone(), t);
                        states.push(s);
                        next.push(t);
                        t
                    }
                };
                arcs.push((q, step, target));
            }
        }
        if stopped {
            break;
        }
        frontier = next;
        depth += 1;
    }

    let ids: Vec<String> = states.iter().map(|s| space.state_id(s)).collect();
    let actions: BTreeSet<String> = arcs
        .iter()
        .flat_map(|(_, step, _)| step.support().cloned())
        .collect();
    let arcs = arcs
        .into_iter()
        .map(|(f, step, t)| Arc::new(ids[f].clone(), step, ids[t].clone()))
        .collect();
    let ts = StepTransitionSystem::new(actions, ids.clone(), &ids[0], arcs)
        .expect("state ids are canonical and distinct");
    Ok(Exploration {
        ts,
        states,
        truncated,
    })
}
