//! Region-based synthesis of PTL-nets spanned over a membrane structure,
//! and through them of basic membrane systems, from a step transition
//! system.
//!
//! The pipeline: build the region cone, compute its extreme rays, keep the
//! rays compatible with the membrane structure, add one locality witness
//! per membrane, then check state separation and forward closure. On
//! success every witness region becomes a place and the resulting net is
//! verified against the input by an isomorphism check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;

use crate::exec::Exec;
use crate::explore::ExploreLimits;
use crate::membrane_structure::{MembraneId, MembraneStructure, StructureViolation};
use crate::membrane_system::BasicMembraneSystem;
use crate::multiset::{count_to_usize, Multiset};
use crate::ptl_net::{Marking, Mode, NetArc, NetError, Node, PtlNet};
use crate::regions::{build_system, extreme_rays, filter_compatible, locality_witnesses, Region};
use crate::transition_system::{Step, StepTransitionSystem, TsViolation};
use crate::translate::{ptl_to_bms, TranslateError, TranslationMaps};

/// Synthesise a net with transitions `T = ts.actions()` located by `loc`
/// whose `mode` reachability graph is isomorphic to `ts`.
#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    pub ts: StepTransitionSystem,
    pub mu: MembraneStructure,
    pub loc: BTreeMap<String, MembraneId>,
    pub mode: Mode,
}

/// Malformed input, or an internal inconsistency.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error("transition system is invalid: {}", join(.0))]
    InvalidTs(Vec<TsViolation>),
    #[error("membrane structure is invalid: {}", join(.0))]
    InvalidStructure(Vec<StructureViolation>),
    #[error("action `{0}` has no location")]
    MissingLocation(String),
    #[error("location given for `{0}`, which labels no arc")]
    UnknownAction(String),
    #[error("action `{action}` is located in unknown membrane {membrane}")]
    UnknownMembrane { action: String, membrane: MembraneId },
    #[error("step size bound does not fit in memory")]
    TooLarge,
    #[error("constructed net failed its certificate check: {0}")]
    Certificate(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join("; ")
}

/// Why the problem has no solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// No compatible region distinguishes the two states.
    Separation { q: String, q2: String },
    /// The region-enabled steps at `state` disagree with the arcs of the
    /// transition system on `step`.
    Closure {
        state: String,
        step: Step,
        region_enabled: bool,
    },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Separation { q, q2 } => {
                write!(f, "state separation fails: no compatible region separates ({q}, {q2})")
            }
            Failure::Closure {
                state,
                step,
                region_enabled: true,
            } => write!(
                f,
                "forward closure fails at {state}: step {step} is not blocked by any compatible region but is not allowed there"
            ),
            Failure::Closure { state, step, .. } => write!(
                f,
                "forward closure fails at {state}: step {step} is allowed there but is blocked by a compatible region"
            ),
        }
    }
}

/// Why a region became a place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessReason {
    Separation { q: String, q2: String },
    Blocking { state: String, step: Step },
    Locality { membrane: MembraneId },
}

impl fmt::Display for WitnessReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessReason::Separation { q, q2 } => write!(f, "separates ({q}, {q2})"),
            WitnessReason::Blocking { state, step } => write!(f, "blocks {step} at {state}"),
            WitnessReason::Locality { membrane } => write!(f, "bounds steps in membrane {membrane}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPlace {
    pub place: String,
    pub region: Region,
    pub reasons: Vec<WitnessReason>,
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub net: PtlNet,
    pub witnesses: Vec<WitnessPlace>,
    /// Verified state bijection: transition-system state to the id of the
    /// corresponding marking in the net's reachability graph.
    pub certificate: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub enum Outcome<T> {
    Success(T),
    Failure(Failure),
}

impl<T> Outcome<T> {
    pub fn success(self) -> Option<T> {
        match self {
            Outcome::Success(x) => Some(x),
            Outcome::Failure(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&Failure> {
        match self {
            Outcome::Success(_) => None,
            Outcome::Failure(f) => Some(f),
        }
    }
}

pub type SynthesisOutcome = Outcome<Synthesized>;

/// A synthesised membrane system with the net it was translated from.
#[derive(Debug, Clone)]
pub struct SynthesizedBms {
    pub bms: BasicMembraneSystem,
    pub maps: TranslationMaps,
    pub net: Synthesized,
}

/// Region-enabled steps at one state, with the first blocking region for
/// every blocked extension met during enumeration.
/// A state pair by index and the position of its first separating region.
pub type Separator = ((usize, usize), usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionEnabled {
    pub steps: BTreeSet<Step>,
    /// `(step, index into the generating regions)`.
    pub blocked: Vec<(Step, usize)>,
}

impl SynthesisProblem {
    pub fn validate(&self) -> Result<(), SynthesisError> {
        let v = self.ts.validate();
        if !v.is_empty() {
            return Err(SynthesisError::InvalidTs(v));
        }
        let v = self.mu.validate_tree();
        if !v.is_empty() {
            return Err(SynthesisError::InvalidStructure(v));
        }
        if let Some(t) = self.ts.actions().iter().find(|t| !self.loc.contains_key(*t)) {
            return Err(SynthesisError::MissingLocation(t.clone()));
        }
        for (t, &i) in &self.loc {
            if !self.ts.actions().contains(t) {
                return Err(SynthesisError::UnknownAction(t.clone()));
            }
            if !self.mu.contains(i) {
                return Err(SynthesisError::UnknownMembrane {
                    action: t.clone(),
                    membrane: i,
                });
            }
        }
        Ok(())
    }

    /// The regions consulted by every check: the compatible extreme rays
    /// followed by the locality witnesses.
    pub fn generating_regions(&self) -> Vec<Region> {
        let rays = extreme_rays(&build_system(&self.ts));
        let mut g = filter_compatible(&rays, &self.ts, &self.mu, &self.loc);
        g.extend(locality_witnesses(&self.ts, &self.mu, &self.loc));
        g
    }
}

/// For every pair of distinct states (in state order) the index of the
/// first region giving them different token counts, or the first pair
/// without one.
pub fn check_state_separation(
    problem: &SynthesisProblem,
    regions: &[Region],
    exec: Exec,
) -> Result<Vec<Separator>, Failure> {
    let states = problem.ts.states();
    let pairs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|i| (i + 1..states.len()).map(move |j| (i, j)))
        .collect();
    let found = exec.map(&pairs, |&(i, j)| {
        regions
            .iter()
            .position(|r| r.sigma_at(&states[i]) != r.sigma_at(&states[j]))
    });
    pairs
        .into_iter()
        .zip(found)
        .map(|((i, j), w)| {
            w.map(|w| ((i, j), w)).ok_or_else(|| Failure::Separation {
                q: states[i].clone(),
                q2: states[j].clone(),
            })
        })
        .collect()
}

/// Nonempty steps of size at most `m·Max` that no region blocks at `q`.
///
/// Blocking is upward closed, so steps are grown breadth-first by size,
/// each unblocked step being extended only by actions not smaller than
/// its largest one; this visits every unblocked step exactly once.
pub fn region_enabled_steps(
    problem: &SynthesisProblem,
    regions: &[Region],
    q: &str,
) -> Result<RegionEnabled, SynthesisError> {
    let actions: Vec<&String> = problem.ts.actions().iter().collect();
    let cap = BigUint::from(problem.mu.degree()) * problem.ts.max_step_size();
    let cap = count_to_usize(&cap).ok_or(SynthesisError::TooLarge)?;
    let blocker = |s: &Step| regions.iter().position(|r| r.blocks(q, s));

    let mut steps = BTreeSet::new();
    let mut blocked = Vec::new();
    // Unblocked steps of the current size, with the index of their largest action.
    let mut frontier: Vec<(Step, usize)> = vec![(Step::new(), 0)];
    for _ in 0..cap {
        let mut next = Vec::new();
        for (s, last) in &frontier {
            for (k, t) in actions.iter().enumerate().skip(*last) {
                let ext = s.sum(&Multiset::singleton((*t).clone()));
                match blocker(&ext) {
                    Some(g) => blocked.push((ext, g)),
                    None => {
                        steps.insert(ext.clone());
                        next.push((ext, k));
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(RegionEnabled { steps, blocked })
}

/// The steps the mode lets through when exactly `rs` are free-enabled.
pub fn mode_filter(
    rs: &BTreeSet<Step>,
    actions: &BTreeSet<String>,
    loc: &BTreeMap<String, MembraneId>,
    mode: Mode,
) -> BTreeSet<Step> {
    if mode == Mode::Free {
        return rs.clone();
    }
    rs.iter()
        .filter(|alpha| {
            let here: BTreeSet<Option<&MembraneId>> = alpha.support().map(|t| loc.get(t)).collect();
            !actions.iter().any(|t| {
                let relevant = mode == Mode::Max || here.contains(&loc.get(t));
                relevant && rs.contains(&alpha.sum(&Multiset::singleton(t.clone())))
            })
        })
        .cloned()
        .collect()
}

/// Compares, state by state, the region-enabled steps filtered by the mode
/// with the steps the transition system allows. The first mismatch in
/// state order is reported with the smallest step of the symmetric
/// difference.
pub fn check_forward_closure(
    problem: &SynthesisProblem,
    region_enabled: &[RegionEnabled],
) -> Result<(), Failure> {
    let ts = &problem.ts;
    for (q, re) in region_enabled.iter().enumerate() {
        let expected = mode_filter(&re.steps, ts.actions(), &problem.loc, problem.mode);
        let actual = ts.enabled_steps_at(q);
        if let Some(step) = expected.symmetric_difference(&actual).next() {
            return Err(Failure::Closure {
                state: ts.states()[q].clone(),
                step: step.clone(),
                region_enabled: expected.contains(step),
            });
        }
    }
    Ok(())
}

pub fn synthesize(problem: &SynthesisProblem) -> Result<SynthesisOutcome, SynthesisError> {
    synthesize_with(problem, Exec::default())
}

pub fn synthesize_with(problem: &SynthesisProblem, exec: Exec) -> Result<SynthesisOutcome, SynthesisError> {
    problem.validate()?;
    let ts = &problem.ts;
    let regions = problem.generating_regions();

    let separation = match check_state_separation(problem, &regions, exec) {
        Ok(s) => s,
        Err(f) => return Ok(Outcome::Failure(f)),
    };
    let region_enabled = exec
        .map(ts.states(), |q| region_enabled_steps(problem, &regions, q))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    if let Err(f) = check_forward_closure(problem, &region_enabled) {
        return Ok(Outcome::Failure(f));
    }

    let states = ts.states();
    let mut chosen: Vec<(Region, WitnessReason)> = Vec::new();
    for ((i, j), w) in separation {
        chosen.push((
            regions[w].clone(),
            WitnessReason::Separation {
                q: states[i].clone(),
                q2: states[j].clone(),
            },
        ));
    }
    for (q, re) in region_enabled.iter().enumerate() {
        for (step, g) in &re.blocked {
            chosen.push((
                regions[*g].clone(),
                WitnessReason::Blocking {
                    state: states[q].clone(),
                    step: step.clone(),
                },
            ));
        }
    }
    for w in locality_witnesses(ts, &problem.mu, &problem.loc) {
        let membrane = w.location.expect("witnesses are located");
        chosen.push((w, WitnessReason::Locality { membrane }));
    }

    let mut witnesses: Vec<WitnessPlace> = Vec::new();
    for (region, reason) in chosen {
        match witnesses.iter_mut().find(|w| w.region == region) {
            Some(w) => {
                if !w.reasons.contains(&reason) {
                    w.reasons.push(reason);
                }
            }
            None => witnesses.push(WitnessPlace {
                place: format!("p{}", witnesses.len()),
                region,
                reasons: vec![reason],
            }),
        }
    }

    let net = build_net(problem, &witnesses)?;
    let certificate = certify(problem, &net, exec)?;
    Ok(Outcome::Success(Synthesized {
        net,
        witnesses,
        certificate,
    }))
}

fn build_net(problem: &SynthesisProblem, witnesses: &[WitnessPlace]) -> Result<PtlNet, SynthesisError> {
    let q0 = problem.ts.initial();
    let mut places = Vec::new();
    let mut arcs = Vec::new();
    let mut initial = Marking::new();
    for w in witnesses {
        places.push(Node::new(w.place.clone(), w.region.location));
        initial.insert(w.place.clone(), w.region.sigma_at(q0));
        for (t, k) in w.region.omega.iter() {
            arcs.push(NetArc::new(w.place.clone(), t.clone(), k.clone()));
        }
        for (t, k) in w.region.iota.iter() {
            arcs.push(NetArc::new(t.clone(), w.place.clone(), k.clone()));
        }
    }
    let transitions = problem
        .ts
        .actions()
        .iter()
        .map(|t| Node::at(t.clone(), problem.loc[t]))
        .collect();
    Ok(PtlNet::new(places, transitions, arcs, initial)?)
}

fn certify(problem: &SynthesisProblem, net: &PtlNet, exec: Exec) -> Result<BTreeMap<String, String>, SynthesisError> {
    let n = problem.ts.states().len();
    let crg = net.reachability_graph_with(problem.mode, ExploreLimits::new(n + 1, n), exec)?;
    if crg.truncated {
        return Err(SynthesisError::Certificate(format!(
            "reachability graph has more than {n} states"
        )));
    }
    let identity: BTreeMap<String, String> = crg.ts.actions().iter().map(|t| (t.clone(), t.clone())).collect();
    let nu = crg
        .ts
        .check_isomorphic(&problem.ts, &identity)
        .map_err(|e| SynthesisError::Certificate(e.to_string()))?
        .ok_or_else(|| SynthesisError::Certificate("reachability graph is not isomorphic to the input".into()))?;
    Ok(nu.into_iter().map(|(m, q)| (q, m)).collect())
}

/// Synthesises a net and translates it into a membrane system whose rules
/// are named after the transitions.
pub fn synthesize_bms(problem: &SynthesisProblem) -> Result<Outcome<SynthesizedBms>, SynthesisError> {
    synthesize_bms_with(problem, Exec::default())
}

pub fn synthesize_bms_with(problem: &SynthesisProblem, exec: Exec) -> Result<Outcome<SynthesizedBms>, SynthesisError> {
    Ok(match synthesize_with(problem, exec)? {
        Outcome::Failure(f) => Outcome::Failure(f),
        Outcome::Success(net) => {
            let (bms, maps) = ptl_to_bms(&net.net, &problem.mu)?;
            Outcome::Success(SynthesizedBms { bms, maps, net })
        }
    })
}
