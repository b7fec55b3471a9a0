//! Step transition systems: finite rooted graphs whose arcs carry
//! multisets of actions.
//!
//! Empty-step self-loops are implicit. They are dropped when a system is
//! constructed and never serialized; an explicit empty step between two
//! distinct states is kept so that [`StepTransitionSystem::validate`] can
//! report it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::multiset::Multiset;

/// A step: a multiset of actions.
pub type Step = Multiset<String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TsError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("arc label uses undeclared action `{0}`")]
    UnknownAction(String),
    #[error("action map is not a bijection: {0}")]
    NotBijective(String),
    #[error("transition system is not deterministic at state `{0}`")]
    Nondeterministic(String),
}

/// A violated well-formedness axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TsViolation {
    Nondeterministic {
        state: String,
        step: Step,
        targets: Vec<String>,
    },
    Unreachable {
        state: String,
    },
    UnusedAction {
        action: String,
    },
    EmptyStepArc {
        from: String,
        to: String,
    },
}

impl fmt::Display for TsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TsViolation::Nondeterministic {
                state,
                step,
                targets,
            } => write!(
                f,
                "determinism: state `{state}` has step {step} leading to {}",
                targets.join(", ")
            ),
            TsViolation::Unreachable { state } => {
                write!(f, "reachability: state `{state}` is unreachable from the initial state")
            }
            TsViolation::UnusedAction { action } => {
                write!(f, "action coverage: action `{action}` labels no arc")
            }
            TsViolation::EmptyStepArc { from, to } => {
                write!(f, "empty step: arc `{from}` -> `{to}` is not a self-loop")
            }
        }
    }
}

/// An arc given by state names, used for construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub from: String,
    pub step: Step,
    pub to: String,
}

impl Arc {
    pub fn new(from: impl Into<String>, step: Step, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            step,
            to: to.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TsFile", into = "TsFile")]
pub struct StepTransitionSystem {
    actions: BTreeSet<String>,
    states: Vec<String>,
    index: HashMap<String, usize>,
    initial: usize,
    // Sorted by (source, step, target) and free of duplicates.
    arcs: Vec<(usize, Step, usize)>,
}

impl StepTransitionSystem {
    pub fn new<A, S>(actions: A, states: S, initial: &str, arcs: Vec<Arc>) -> Result<Self, TsError>
    where
        A: IntoIterator<Item = String>,
        S: IntoIterator<Item = String>,
    {
        let actions: BTreeSet<String> = actions.into_iter().collect();
        let states: Vec<String> = states.into_iter().collect();
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(TsError::DuplicateState(s.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| TsError::UnknownState(s.to_string()))
        };
        let initial = lookup(initial)?;
        let mut indexed = Vec::with_capacity(arcs.len());
        for arc in arcs {
            let from = lookup(&arc.from)?;
            let to = lookup(&arc.to)?;
            if let Some(a) = arc.step.support().find(|a| !actions.contains(*a)) {
                return Err(TsError::UnknownAction(a.clone()));
            }
            if arc.step.is_empty() && from == to {
                continue;
            }
            indexed.push((from, arc.step, to));
        }
        indexed.sort();
        indexed.dedup();
        Ok(Self {
            actions,
            states,
            index,
            initial,
            arcs: indexed,
        })
    }

    /// Convenience constructor: states are collected from the arcs in order
    /// of first appearance (initial first) and actions from the labels.
    pub fn from_arcs(initial: &str, arcs: Vec<Arc>) -> Result<Self, TsError> {
        let mut states = vec![initial.to_string()];
        let mut seen: BTreeSet<String> = states.iter().cloned().collect();
        let mut actions = BTreeSet::new();
        for arc in &arcs {
            for s in [&arc.from, &arc.to] {
                if seen.insert(s.clone()) {
                    states.push(s.clone());
                }
            }
            actions.extend(arc.step.support().cloned());
        }
        Self::new(actions, states, initial, arcs)
    }

    pub fn actions(&self) -> &BTreeSet<String> {
        &self.actions
    }

    /// States in storage order.
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> &str {
        &self.states[self.initial]
    }

    pub fn initial_index(&self) -> usize {
        self.initial
    }

    pub fn state_index(&self, q: &str) -> Option<usize> {
        self.index.get(q).copied()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Explicit arcs as `(source, step, target)` state indices.
    pub fn indexed_arcs(&self) -> &[(usize, Step, usize)] {
        &self.arcs
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&str, &Step, &str)> {
        self.arcs
            .iter()
            .map(|(f, s, t)| (self.states[*f].as_str(), s, self.states[*t].as_str()))
    }

    /// Outgoing explicit arcs of the state with index `q`.
    pub fn outgoing(&self, q: usize) -> impl Iterator<Item = (&Step, usize)> {
        let start = self.arcs.partition_point(|(f, _, _)| *f < q);
        self.arcs[start..]
            .iter()
            .take_while(move |(f, _, _)| *f == q)
            .map(|(_, s, t)| (s, *t))
    }

    /// Checks the four axioms: determinism, reachability of every state,
    /// coverage of every action, and empty steps only as self-loops.
    pub fn validate(&self) -> Vec<TsViolation> {
        let mut out = Vec::new();

        let mut targets: BTreeMap<(usize, &Step), Vec<usize>> = BTreeMap::new();
        for (f, s, t) in &self.arcs {
            targets.entry((*f, s)).or_default().push(*t);
        }
        for ((f, step), ts) in targets {
            if ts.len() > 1 {
                out.push(TsViolation::Nondeterministic {
                    state: self.states[f].clone(),
                    step: step.clone(),
                    targets: ts.iter().map(|t| self.states[*t].clone()).collect(),
                });
            }
        }

        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for (_, t) in self.outgoing(q) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        for (i, reached) in seen.iter().enumerate() {
            if !reached {
                out.push(TsViolation::Unreachable {
                    state: self.states[i].clone(),
                });
            }
        }

        let used: BTreeSet<&String> = self.arcs.iter().flat_map(|(_, s, _)| s.support()).collect();
        for a in &self.actions {
            if !used.contains(a) {
                out.push(TsViolation::UnusedAction { action: a.clone() });
            }
        }

        for (f, s, t) in &self.arcs {
            if s.is_empty() {
                out.push(TsViolation::EmptyStepArc {
                    from: self.states[*f].clone(),
                    to: self.states[*t].clone(),
                });
            }
        }
        out
    }

    /// Nonempty steps enabled at state `q`.
    pub fn enabled_steps(&self, q: &str) -> Result<BTreeSet<Step>, TsError> {
        let qi = self
            .state_index(q)
            .ok_or_else(|| TsError::UnknownState(q.to_string()))?;
        Ok(self.enabled_steps_at(qi))
    }

    pub fn enabled_steps_at(&self, q: usize) -> BTreeSet<Step> {
        self.outgoing(q)
            .filter(|(s, _)| !s.is_empty())
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Largest step size over all arcs (0 when there are none).
    pub fn max_step_size(&self) -> BigUint {
        self.arcs
            .iter()
            .map(|(_, s, _)| s.size())
            .max()
            .unwrap_or_default()
    }

    fn transition_function(&self) -> Result<Vec<BTreeMap<&Step, usize>>, TsError> {
        let mut out = vec![BTreeMap::new(); self.states.len()];
        for (f, s, t) in &self.arcs {
            if out[*f].insert(s, *t).is_some_and(|prev| prev != *t) {
                return Err(TsError::Nondeterministic(self.states[*f].clone()));
            }
        }
        Ok(out)
    }

    /// Checks `self ∼φ,ν other` for the given action bijection `phi` and
    /// returns the state bijection `ν` if one exists.
    ///
    /// `phi` must be defined and injective on the actions of `self`; its
    /// entries for other symbols are ignored. Both systems must be
    /// deterministic, which makes `ν` unique: it is built by a synchronized
    /// breadth-first traversal from the initial states.
    pub fn check_isomorphic(
        &self,
        other: &Self,
        phi: &BTreeMap<String, String>,
    ) -> Result<Option<BTreeMap<String, String>>, TsError> {
        let mut image = BTreeSet::new();
        for a in &self.actions {
            let b = phi
                .get(a)
                .ok_or_else(|| TsError::NotBijective(format!("undefined on `{a}`")))?;
            if !image.insert(b.clone()) {
                return Err(TsError::NotBijective(format!("`{b}` has several preimages")));
            }
        }
        let delta = self.transition_function()?;
        let delta2 = other.transition_function()?;
        if image != other.actions || self.states.len() != other.states.len() {
            return Ok(None);
        }

        let n = self.states.len();
        let mut nu: Vec<Option<usize>> = vec![None; n];
        let mut inv: Vec<Option<usize>> = vec![None; n];
        nu[self.initial] = Some(other.initial);
        inv[other.initial] = Some(self.initial);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            let q2 = nu[q].expect("queued states are mapped");
            if delta[q].len() != delta2[q2].len() {
                return Ok(None);
            }
            for (step, &t) in &delta[q] {
                let mapped = step
                    .map_image(|a| phi.get(a).cloned())
                    .map_err(|e| TsError::NotBijective(e.to_string()))?;
                let Some(&t2) = delta2[q2].get(&mapped) else {
                    return Ok(None);
                };
                match (nu[t], inv[t2]) {
                    (None, None) => {
                        nu[t] = Some(t2);
                        inv[t2] = Some(t);
                        queue.push_back(t);
                    }
                    (Some(a), Some(b)) if a == t2 && b == t => {}
                    _ => return Ok(None),
                }
            }
        }
        if nu.iter().any(Option::is_none) {
            return Ok(None);
        }
        Ok(Some(
            nu.iter()
                .enumerate()
                .map(|(q, q2)| (self.states[q].clone(), other.states[q2.unwrap()].clone()))
                .collect(),
        ))
    }

    /// Graphviz rendering; the initial state is drawn with a double border.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ts {\n  rankdir=LR;\n  node [shape=ellipse];\n");
        for (i, s) in self.states.iter().enumerate() {
            let periph = if i == self.initial { ", peripheries=2" } else { "" };
            out.push_str(&format!("  s{i} [label={}{periph}];\n", crate::dot::quote(s)));
        }
        for (f, step, t) in &self.arcs {
            out.push_str(&format!(
                "  s{f} -> s{t} [label={}];\n",
                crate::dot::quote(&step.to_string())
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// On-disk `.sts` layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TsFile {
    actions: Vec<String>,
    states: Vec<String>,
    initial: String,
    arcs: Vec<Arc>,
}

impl TryFrom<TsFile> for StepTransitionSystem {
    type Error = TsError;

    fn try_from(f: TsFile) -> Result<Self, TsError> {
        StepTransitionSystem::new(f.actions, f.states, &f.initial, f.arcs)
    }
}

impl From<StepTransitionSystem> for TsFile {
    fn from(ts: StepTransitionSystem) -> Self {
        let arcs = ts
            .arcs
            .iter()
            .map(|(f, s, t)| Arc::new(ts.states[*f].clone(), s.clone(), ts.states[*t].clone()))
            .collect();
        TsFile {
            actions: ts.actions.iter().cloned().collect(),
            initial: ts.states[ts.initial].clone(),
            states: ts.states,
            arcs,
        }
    }
}
