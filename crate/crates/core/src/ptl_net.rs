//! Place/transition nets with localities (PTL-nets) and their step
//! semantics under the free, max and lmax execution modes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dot;
use crate::exec::Exec;
use crate::explore::{explore, ExploreLimits, Exploration, StateSpace};
use crate::membrane_structure::{MembraneId, MembraneStructure};
use crate::multiset::{count_serde, count_to_usize, Multiset};
use crate::transition_system::Step;

/// A marking: a multiset of places.
pub type Marking = Multiset<String>;

/// Step enabling discipline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Free,
    Max,
    Lmax,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Free, Mode::Max, Mode::Lmax];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Free => "free",
            Mode::Max => "max",
            Mode::Lmax => "lmax",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "free" => Ok(Mode::Free),
            "max" => Ok(Mode::Max),
            "lmax" => Ok(Mode::Lmax),
            other => Err(format!("unknown mode `{other}` (expected free, max or lmax)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetError {
    #[error("node id `{0}` is declared twice")]
    DuplicateNode(String),
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("arc endpoint `{0}` is not a declared node")]
    UnknownNode(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("arc `{from}` -> `{to}` must connect a place and a transition")]
    BadArc { from: String, to: String },
    #[error("arc `{from}` -> `{to}` is declared twice")]
    DuplicateArc { from: String, to: String },
    #[error("transition `{0}` has no input place")]
    NoInputPlace(String),
    #[error("lmax mode needs a location for transition `{0}`")]
    MissingLocation(String),
    #[error("step is not free-enabled at the marking")]
    NotEnabled,
    #[error("exploration limits must be positive")]
    InvalidLimits,
    #[error("step enumeration bound exceeds the address space")]
    TooLarge,
}

/// A place or transition together with its (optional) location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<MembraneId>,
}

impl Node {
    pub fn new(id: impl Into<String>, location: Option<MembraneId>) -> Self {
        Self {
            id: id.into(),
            location,
        }
    }

    pub fn at(id: impl Into<String>, location: MembraneId) -> Self {
        Self::new(id, Some(location))
    }
}

/// A weighted arc, either place→transition or transition→place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetArc {
    pub from: String,
    pub to: String,
    #[serde(with = "count_serde")]
    pub weight: BigUint,
}

impl NetArc {
    pub fn new(from: impl Into<String>, to: impl Into<String>, weight: impl Into<BigUint>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            weight: weight.into(),
        }
    }
}

/// A violated condition of "spanned over μ".
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpanViolation {
    MissingLocation { node: String },
    UnknownMembrane { node: String, membrane: MembraneId },
    InputNotLocal { place: String, transition: String },
    OutputNotAdjacent { transition: String, place: String },
}

impl fmt::Display for SpanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpanViolation::MissingLocation { node } => write!(f, "`{node}` has no location"),
            SpanViolation::UnknownMembrane { node, membrane } => {
                write!(f, "`{node}` is located in unknown membrane {membrane}")
            }
            SpanViolation::InputNotLocal { place, transition } => write!(
                f,
                "input locality: `{transition}` consumes from `{place}` in another membrane"
            ),
            SpanViolation::OutputNotAdjacent { transition, place } => write!(
                f,
                "output relation: `{transition}` produces into `{place}`, which is neither co-located nor across a parent/child edge"
            ),
        }
    }
}

/// Per-transition counts of a step and the marking left after its pre-multiset.
type DenseStep = (Vec<usize>, Vec<BigUint>);

/// A PT-net with localities. Places and transitions are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PtlFile", into = "PtlFile")]
pub struct PtlNet {
    places: Vec<Node>,
    transitions: Vec<Node>,
    place_index: HashMap<String, usize>,
    transition_index: HashMap<String, usize>,
    // Per transition, sorted by place index: W(p,t) and W(t,p).
    pre: Vec<Vec<(usize, BigUint)>>,
    post: Vec<Vec<(usize, BigUint)>>,
    initial: Marking,
}

impl PtlNet {
    pub fn new(
        mut places: Vec<Node>,
        mut transitions: Vec<Node>,
        arcs: Vec<NetArc>,
        initial_marking: Marking,
    ) -> Result<Self, NetError> {
        places.sort();
        transitions.sort();
        let mut seen = BTreeSet::new();
        for n in places.iter().chain(&transitions) {
            if !seen.insert(n.id.as_str()) {
                return Err(NetError::DuplicateNode(n.id.clone()));
            }
        }
        let place_index: HashMap<String, usize> = places
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let transition_index: HashMap<String, usize> = transitions
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();

        let mut pre: Vec<BTreeMap<usize, BigUint>> = vec![BTreeMap::new(); transitions.len()];
        let mut post: Vec<BTreeMap<usize, BigUint>> = vec![BTreeMap::new(); transitions.len()];
        for arc in arcs {
            if arc.weight.is_zero() {
                continue;
            }
            let (table, t, p) = match (
                place_index.get(&arc.from),
                transition_index.get(&arc.to),
                transition_index.get(&arc.from),
                place_index.get(&arc.to),
            ) {
                (Some(&p), Some(&t), _, _) => (&mut pre, t, p),
                (_, _, Some(&t), Some(&p)) => (&mut post, t, p),
                _ if !seen.contains(arc.from.as_str()) => return Err(NetError::UnknownNode(arc.from)),
                _ if !seen.contains(arc.to.as_str()) => return Err(NetError::UnknownNode(arc.to)),
                _ => {
                    return Err(NetError::BadArc {
                        from: arc.from,
                        to: arc.to,
                    })
                }
            };
            if table[t].insert(p, arc.weight).is_some() {
                return Err(NetError::DuplicateArc {
                    from: arc.from,
                    to: arc.to,
                });
            }
        }
        for (t, inputs) in pre.iter().enumerate() {
            if inputs.is_empty() {
                return Err(NetError::NoInputPlace(transitions[t].id.clone()));
            }
        }
        if let Some(p) = initial_marking.support().find(|p| !place_index.contains_key(*p)) {
            return Err(NetError::UnknownPlace(p.clone()));
        }
        let flatten = |v: Vec<BTreeMap<usize, BigUint>>| -> Vec<Vec<(usize, BigUint)>> {
            v.into_iter().map(|m| m.into_iter().collect()).collect()
        };
        Ok(Self {
            places,
            transitions,
            place_index,
            transition_index,
            pre: flatten(pre),
            post: flatten(post),
            initial: initial_marking,
        })
    }

    pub fn places(&self) -> &[Node] {
        &self.places
    }

    pub fn transitions(&self) -> &[Node] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn place(&self, id: &str) -> Option<&Node> {
        self.place_index.get(id).map(|&i| &self.places[i])
    }

    pub fn transition(&self, id: &str) -> Option<&Node> {
        self.transition_index.get(id).map(|&i| &self.transitions[i])
    }

    pub fn location(&self, id: &str) -> Option<MembraneId> {
        self.place(id)
            .or_else(|| self.transition(id))
            .and_then(|n| n.location)
    }

    /// `W(p,t)`.
    pub fn weight_in(&self, place: &str, transition: &str) -> BigUint {
        self.lookup_weight(&self.pre, place, transition)
    }

    /// `W(t,p)`.
    pub fn weight_out(&self, transition: &str, place: &str) -> BigUint {
        self.lookup_weight(&self.post, place, transition)
    }

    fn lookup_weight(&self, table: &[Vec<(usize, BigUint)>], place: &str, transition: &str) -> BigUint {
        match (self.place_index.get(place), self.transition_index.get(transition)) {
            (Some(&p), Some(&t)) => table[t]
                .iter()
                .find(|(q, _)| *q == p)
                .map(|(_, w)| w.clone())
                .unwrap_or_default(),
            _ => BigUint::zero(),
        }
    }

    /// All arcs, place→transition ones first, each group sorted.
    pub fn arcs(&self) -> Vec<NetArc> {
        let mut input = Vec::new();
        let mut output = Vec::new();
        for (t, node) in self.transitions.iter().enumerate() {
            for (p, w) in &self.pre[t] {
                input.push(NetArc::new(self.places[*p].id.clone(), node.id.clone(), w.clone()));
            }
            for (p, w) in &self.post[t] {
                output.push(NetArc::new(node.id.clone(), self.places[*p].id.clone(), w.clone()));
            }
        }
        input.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        input.extend(output);
        input
    }

    fn transition_idx(&self, t: &str) -> Result<usize, NetError> {
        self.transition_index
            .get(t)
            .copied()
            .ok_or_else(|| NetError::UnknownTransition(t.to_string()))
    }

    /// Pre- and post-multisets of places of a step.
    pub fn pre_post(&self, step: &Step) -> Result<(Marking, Marking), NetError> {
        let mut pre = Marking::new();
        let mut post = Marking::new();
        for (t, n) in step.iter() {
            let ti = self.transition_idx(t)?;
            for (p, w) in &self.pre[ti] {
                pre.insert(self.places[*p].id.clone(), w * n);
            }
            for (p, w) in &self.post[ti] {
                post.insert(self.places[*p].id.clone(), w * n);
            }
        }
        Ok((pre, post))
    }

    fn require_locations(&self) -> Result<(), NetError> {
        match self.transitions.iter().find(|t| t.location.is_none()) {
            Some(t) => Err(NetError::MissingLocation(t.id.clone())),
            None => Ok(()),
        }
    }

    fn free_enabled(&self, marking: &Marking, step: &Step) -> Result<bool, NetError> {
        Ok(self.pre_post(step)?.0.leq(marking))
    }

    /// Mode-enabledness of `step` at `marking`, checked by the extension
    /// definitions.
    pub fn is_enabled(&self, marking: &Marking, step: &Step, mode: Mode) -> Result<bool, NetError> {
        if mode == Mode::Lmax {
            self.require_locations()?;
        }
        if !self.free_enabled(marking, step)? {
            return Ok(false);
        }
        let active: BTreeSet<Option<MembraneId>> = step
            .support()
            .map(|t| self.transition(t).and_then(|n| n.location))
            .collect();
        for t in &self.transitions {
            let counts = match mode {
                Mode::Free => false,
                Mode::Max => true,
                Mode::Lmax => active.contains(&t.location),
            };
            if counts && self.free_enabled(marking, &step.sum(&Step::singleton(t.id.clone())))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Fires a free-enabled step: `M - pre U + post U`.
    pub fn execute(&self, marking: &Marking, step: &Step) -> Result<Marking, NetError> {
        let (pre, post) = self.pre_post(step)?;
        let rest = marking.checked_sub(&pre).ok_or(NetError::NotEnabled)?;
        Ok(rest.sum(&post))
    }

    /// All nonempty steps enabled at `marking` under `mode`.
    pub fn enabled_steps(&self, marking: &Marking, mode: Mode) -> Result<BTreeSet<Step>, NetError> {
        if mode == Mode::Lmax {
            self.require_locations()?;
        }
        if let Some(p) = marking.support().find(|p| !self.place_index.contains_key(*p)) {
            return Err(NetError::UnknownPlace(p.clone()));
        }
        let dense = self.to_dense(marking);
        Ok(self
            .enabled_dense(&dense, mode)?
            .into_iter()
            .map(|(counts, _)| self.step_from_counts(&counts))
            .collect())
    }

    fn step_from_counts(&self, counts: &[usize]) -> Step {
        Step::from_counts(
            counts
                .iter()
                .enumerate()
                .map(|(t, &c)| (self.transitions[t].id.clone(), BigUint::from(c))),
        )
    }

    fn to_dense(&self, marking: &Marking) -> Vec<BigUint> {
        self.places.iter().map(|p| marking.count(&p.id)).collect()
    }

    fn marking_of(&self, dense: &[BigUint]) -> Marking {
        Marking::from_counts(
            dense
                .iter()
                .enumerate()
                .map(|(p, n)| (self.places[p].id.clone(), n.clone())),
        )
    }

    fn fits(&self, t: usize, available: &[BigUint]) -> bool {
        self.pre[t].iter().all(|(p, w)| *w <= available[*p])
    }

    /// Depth-first enumeration of free-enabled steps in transition order,
    /// returning each nonempty mode-enabled step as per-transition counts
    /// together with the marking left after consuming its pre-multiset.
    fn enabled_dense(
        &self,
        marking: &[BigUint],
        mode: Mode,
    ) -> Result<Vec<DenseStep>, NetError> {
        let mut out = Vec::new();
        let mut counts = vec![0usize; self.transitions.len()];
        let mut rest = marking.to_vec();
        self.extend_steps(0, &mut counts, &mut rest, mode, &mut out)?;
        Ok(out)
    }

    fn extend_steps(
        &self,
        t: usize,
        counts: &mut Vec<usize>,
        rest: &mut Vec<BigUint>,
        mode: Mode,
        out: &mut Vec<DenseStep>,
    ) -> Result<(), NetError> {
        if t == self.transitions.len() {
            if counts.iter().all(|&c| c == 0) {
                return Ok(());
            }
            let blocked = |u: usize| !self.fits(u, rest);
            let maximal = match mode {
                Mode::Free => true,
                Mode::Max => (0..self.transitions.len()).all(blocked),
                Mode::Lmax => {
                    let active: BTreeSet<Option<MembraneId>> = (0..counts.len())
                        .filter(|&u| counts[u] > 0)
                        .map(|u| self.transitions[u].location)
                        .collect();
                    (0..self.transitions.len())
                        .filter(|&u| active.contains(&self.transitions[u].location))
                        .all(blocked)
                }
            };
            if maximal {
                out.push((counts.clone(), rest.clone()));
            }
            return Ok(());
        }
        let bound = self.pre[t]
            .iter()
            .map(|(p, w)| &rest[*p] / w)
            .min()
            .expect("every transition has an input place");
        let bound = count_to_usize(&bound).ok_or(NetError::TooLarge)?;
        for c in 0..=bound {
            if c > 0 {
                for (p, w) in &self.pre[t] {
                    rest[*p] -= w;
                }
            }
            counts[t] = c;
            self.extend_steps(t + 1, counts, rest, mode, out)?;
        }
        for (p, w) in &self.pre[t] {
            rest[*p] += w * BigUint::from(bound);
        }
        counts[t] = 0;
        Ok(())
    }

    fn successors_dense(&self, marking: &[BigUint], mode: Mode) -> Result<Vec<(Step, Vec<BigUint>)>, NetError> {
        let mut out = Vec::new();
        for (counts, mut rest) in self.enabled_dense(marking, mode)? {
            for (t, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let c = BigUint::from(c);
                    for (p, w) in &self.post[t] {
                        rest[*p] += w * &c;
                    }
                }
            }
            out.push((self.step_from_counts(&counts), rest));
        }
        Ok(out)
    }

    /// Mode-concurrent reachability graph, explored breadth-first from the
    /// initial marking within `limits`.
    pub fn reachability_graph(&self, mode: Mode, limits: ExploreLimits) -> Result<Exploration<Marking>, NetError> {
        self.reachability_graph_with(mode, limits, Exec::default())
    }

    pub fn reachability_graph_with(
        &self,
        mode: Mode,
        limits: ExploreLimits,
        exec: Exec,
    ) -> Result<Exploration<Marking>, NetError> {
        if !limits.is_valid() {
            return Err(NetError::InvalidLimits);
        }
        if mode == Mode::Lmax {
            self.require_locations()?;
        }
        let g = explore(&NetSpace { net: self, mode }, limits, exec)?;
        Ok(Exploration {
            states: g.states.iter().map(|d| self.marking_of(d)).collect(),
            ts: g.ts,
            truncated: g.truncated,
        })
    }

    /// Checks that the net is spanned over `mu`: inputs are co-located with
    /// their transition, outputs are co-located or one tree edge away.
    pub fn check_spanned(&self, mu: &MembraneStructure) -> Vec<SpanViolation> {
        let mut out = Vec::new();
        for n in self.places.iter().chain(&self.transitions) {
            match n.location {
                None => out.push(SpanViolation::MissingLocation { node: n.id.clone() }),
                Some(m) if !mu.contains(m) => out.push(SpanViolation::UnknownMembrane {
                    node: n.id.clone(),
                    membrane: m,
                }),
                Some(_) => {}
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (t, tn) in self.transitions.iter().enumerate() {
            let lt = tn.location.expect("checked above");
            for (p, _) in &self.pre[t] {
                let pn = &self.places[*p];
                if pn.location != Some(lt) {
                    out.push(SpanViolation::InputNotLocal {
                        place: pn.id.clone(),
                        transition: tn.id.clone(),
                    });
                }
            }
            for (p, _) in &self.post[t] {
                let pn = &self.places[*p];
                let lp = pn.location.expect("checked above");
                let rel = mu.relation(lp, lt).expect("membranes checked above");
                if !rel.is_adjacent_or_same() {
                    out.push(SpanViolation::OutputNotAdjacent {
                        transition: tn.id.clone(),
                        place: pn.id.clone(),
                    });
                }
            }
        }
        out
    }

    /// Graphviz rendering: circles for places (labelled with their token
    /// count), boxes for transitions, one fill shade per locality, and
    /// weights above one as edge labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ptl {\n  rankdir=LR;\n");
        let fill = |n: &Node| match n.location {
            Some(m) => format!(", style=filled, fillcolor={}", dot::locality_color(m)),
            None => String::new(),
        };
        for p in &self.places {
            let tokens = self.initial.count(&p.id);
            out.push_str(&format!(
                "  {} [shape=circle, label={}, xlabel={}{}];\n",
                dot::quote(&p.id),
                dot::quote(&tokens.to_string()),
                dot::quote(&p.id),
                fill(p)
            ));
        }
        for t in &self.transitions {
            out.push_str(&format!(
                "  {} [shape=box, label={}{}];\n",
                dot::quote(&t.id),
                dot::quote(&t.id),
                fill(t)
            ));
        }
        for arc in self.arcs() {
            let label = if arc.weight > BigUint::from(1u32) {
                format!(" [label={}]", dot::quote(&arc.weight.to_string()))
            } else {
                String::new()
            };
            out.push_str(&format!(
                "  {} -> {}{};\n",
                dot::quote(&arc.from),
                dot::quote(&arc.to),
                label
            ));
        }
        out.push_str("}\n");
        out
    }
}

struct NetSpace<'a> {
    net: &'a PtlNet,
    mode: Mode,
}

impl StateSpace for NetSpace<'_> {
    type State = Vec<BigUint>;
    type Error = NetError;

    fn initial(&self) -> Vec<BigUint> {
        self.net.to_dense(&self.net.initial)
    }

    fn successors(&self, s: &Vec<BigUint>) -> Result<Vec<(Step, Vec<BigUint>)>, NetError> {
        self.net.successors_dense(s, self.mode)
    }

    fn state_id(&self, s: &Vec<BigUint>) -> String {
        self.net.marking_of(s).to_string()
    }
}

/// On-disk `.ptl` layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PtlFile {
    places: Vec<Node>,
    transitions: Vec<Node>,
    arcs: Vec<NetArc>,
    initial_marking: Marking,
}

impl TryFrom<PtlFile> for PtlNet {
    type Error = NetError;

    fn try_from(f: PtlFile) -> Result<Self, NetError> {
        PtlNet::new(f.places, f.transitions, f.arcs, f.initial_marking)
    }
}

impl From<PtlNet> for PtlFile {
    fn from(net: PtlNet) -> Self {
        PtlFile {
            arcs: net.arcs(),
            places: net.places,
            transitions: net.transitions,
            initial_marking: net.initial,
        }
    }
}
