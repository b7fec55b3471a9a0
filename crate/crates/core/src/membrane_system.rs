//! Basic membrane systems: per-membrane evolution rules over a membrane
//! tree, vector multi-rules, and the free/max/lmax evolution modes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::explore::{explore, ExploreLimits, Exploration, StateSpace};
use crate::membrane_structure::{MembraneId, MembraneStructure, StructureViolation};
use crate::multiset::{count_serde, count_to_usize, Multiset};
use crate::ptl_net::Mode;
use crate::transition_system::Step;

/// Where a right-hand-side object goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Here,
    /// To the parent membrane.
    Out,
    /// To the given child membrane.
    In(MembraneId),
}

/// An object of a rule's right-hand side: `a`, `a_out` or `a_in_j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexedObject {
    pub object: String,
    pub target: Target,
}

impl IndexedObject {
    pub fn here(object: impl Into<String>) -> Self {
        Self {
            object: object.into(),
            target: Target::Here,
        }
    }

    pub fn out(object: impl Into<String>) -> Self {
        Self {
            object: object.into(),
            target: Target::Out,
        }
    }

    pub fn into_child(object: impl Into<String>, child: MembraneId) -> Self {
        Self {
            object: object.into(),
            target: Target::In(child),
        }
    }
}

impl fmt::Display for IndexedObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target {
            Target::Here => write!(f, "{}", self.object),
            Target::Out => write!(f, "{}_out", self.object),
            Target::In(j) => write!(f, "{}_in{j}", self.object),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionRule {
    pub name: String,
    pub lhs: Multiset<String>,
    pub rhs: Multiset<IndexedObject>,
}

impl EvolutionRule {
    pub fn new(name: impl Into<String>, lhs: Multiset<String>, rhs: Multiset<IndexedObject>) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
        }
    }
}

/// One multiset of objects per membrane; index 0 is membrane 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<Multiset<String>>);

impl Configuration {
    pub fn new(contents: Vec<Multiset<String>>) -> Self {
        Self(contents)
    }

    pub fn empty(degree: usize) -> Self {
        Self(vec![Multiset::new(); degree])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Contents of membrane `i` (1-based).
    pub fn membrane(&self, i: MembraneId) -> &Multiset<String> {
        &self.0[i - 1]
    }

    pub fn membranes(&self) -> &[Multiset<String>] {
        &self.0
    }

    /// Total number of objects over all membranes.
    pub fn size(&self) -> BigUint {
        self.0.iter().map(Multiset::size).sum()
    }
}

/// Canonical id `({a:1},{},{b:2})`, membranes in increasing order.
impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str(")")
    }
}

/// One multiset of rule names per membrane; index 0 is membrane 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorMultiRule(Vec<Multiset<String>>);

impl VectorMultiRule {
    pub fn new(components: Vec<Multiset<String>>) -> Self {
        Self(components)
    }

    pub fn empty(degree: usize) -> Self {
        Self(vec![Multiset::new(); degree])
    }

    pub fn component(&self, i: MembraneId) -> &Multiset<String> {
        &self.0[i - 1]
    }

    pub fn components(&self) -> &[Multiset<String>] {
        &self.0
    }

    /// True when every component is empty.
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Multiset::is_empty)
    }

    /// `r₁ + … + r_m`, the reachability-graph label.
    pub fn flatten(&self) -> Step {
        self.0.iter().fold(Step::new(), |acc, r| acc.sum(r))
    }
}

impl fmt::Display for VectorMultiRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BmsError {
    #[error("rule name `{0}` is used twice")]
    DuplicateRule(String),
    #[error("membrane {0} is not part of the structure")]
    UnknownMembrane(MembraneId),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` does not belong to membrane {membrane}")]
    WrongMembrane { rule: String, membrane: MembraneId },
    #[error("expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("vector multi-rule is not free-enabled at the configuration")]
    NotEnabled,
    #[error("exploration limits must be positive")]
    InvalidLimits,
    #[error("rule enumeration bound exceeds the address space")]
    TooLarge,
}

/// A violated rule-shape or structure constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BmsViolation {
    Structure(StructureViolation),
    EmptyLhs { rule: String },
    UnknownObject { context: String, object: String },
    RootOut { rule: String },
    InTargetNotChild { rule: String, membrane: MembraneId, target: MembraneId },
}

impl fmt::Display for BmsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BmsViolation::Structure(v) => write!(f, "structure: {v}"),
            BmsViolation::EmptyLhs { rule } => write!(f, "rule `{rule}` has an empty left-hand side"),
            BmsViolation::UnknownObject { context, object } => {
                write!(f, "{context} uses object `{object}` outside the alphabet")
            }
            BmsViolation::RootOut { rule } => {
                write!(f, "root-out: rule `{rule}` of the root membrane sends an object out")
            }
            BmsViolation::InTargetNotChild {
                rule,
                membrane,
                target,
            } => write!(
                f,
                "in-target: rule `{rule}` of membrane {membrane} sends into {target}, which is not a child"
            ),
        }
    }
}

/// Accumulated left- and right-hand sides in one membrane.
pub type RuleSides = (Multiset<String>, Multiset<IndexedObject>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BmsFile", into = "BmsFile")]
pub struct BasicMembraneSystem {
    objects: BTreeSet<String>,
    structure: MembraneStructure,
    initial: Configuration,
    // Index 0 is membrane 1; each list is sorted by rule name.
    rules: Vec<Vec<EvolutionRule>>,
    rule_index: HashMap<String, (MembraneId, usize)>,
}

impl BasicMembraneSystem {
    /// Builds a system. Membranes missing from `initial` start empty and
    /// membranes missing from `rules` have no rules. Rule shape is not
    /// checked here; see [`BasicMembraneSystem::validate`].
    pub fn new(
        objects: impl IntoIterator<Item = String>,
        structure: MembraneStructure,
        initial: BTreeMap<MembraneId, Multiset<String>>,
        rules: BTreeMap<MembraneId, Vec<EvolutionRule>>,
    ) -> Result<Self, BmsError> {
        let m = structure.degree();
        let mut config = Configuration::empty(m);
        for (i, w) in initial {
            if !structure.contains(i) {
                return Err(BmsError::UnknownMembrane(i));
            }
            config.0[i - 1] = w;
        }
        let mut per_membrane = vec![Vec::new(); m];
        let mut rule_index = HashMap::new();
        for (i, mut rs) in rules {
            if !structure.contains(i) {
                return Err(BmsError::UnknownMembrane(i));
            }
            rs.sort_by(|a, b| a.name.cmp(&b.name));
            for (k, r) in rs.iter().enumerate() {
                if rule_index.insert(r.name.clone(), (i, k)).is_some() {
                    return Err(BmsError::DuplicateRule(r.name.clone()));
                }
            }
            per_membrane[i - 1] = rs;
        }
        Ok(Self {
            objects: objects.into_iter().collect(),
            structure,
            initial: config,
            rules: per_membrane,
            rule_index,
        })
    }

    pub fn objects(&self) -> &BTreeSet<String> {
        &self.objects
    }

    pub fn structure(&self) -> &MembraneStructure {
        &self.structure
    }

    pub fn degree(&self) -> usize {
        self.structure.degree()
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    /// Rules of membrane `i`, sorted by name.
    pub fn rules_in(&self, i: MembraneId) -> &[EvolutionRule] {
        &self.rules[i - 1]
    }

    pub fn rule(&self, name: &str) -> Option<(MembraneId, &EvolutionRule)> {
        self.rule_index
            .get(name)
            .map(|&(i, k)| (i, &self.rules[i - 1][k]))
    }

    pub fn validate(&self) -> Vec<BmsViolation> {
        let mut out: Vec<BmsViolation> = self
            .structure
            .validate_tree()
            .into_iter()
            .map(BmsViolation::Structure)
            .collect();
        let tree_ok = out.is_empty();
        let root = self.structure.root();
        for (i, w) in self.initial.0.iter().enumerate() {
            for a in w.support().filter(|a| !self.objects.contains(*a)) {
                out.push(BmsViolation::UnknownObject {
                    context: format!("initial contents of membrane {}", i + 1),
                    object: a.clone(),
                });
            }
        }
        for (idx, rs) in self.rules.iter().enumerate() {
            let i = idx + 1;
            for r in rs {
                if r.lhs.is_empty() {
                    out.push(BmsViolation::EmptyLhs { rule: r.name.clone() });
                }
                let used = r.lhs.support().chain(r.rhs.support().map(|o| &o.object));
                let unknown: BTreeSet<&String> = used.filter(|a| !self.objects.contains(*a)).collect();
                for a in unknown {
                    out.push(BmsViolation::UnknownObject {
                        context: format!("rule `{}`", r.name),
                        object: a.clone(),
                    });
                }
                let targets: BTreeSet<Target> = r.rhs.support().map(|o| o.target).collect();
                for t in targets {
                    match t {
                        Target::Here => {}
                        Target::Out => {
                            if tree_ok && root == Some(i) {
                                out.push(BmsViolation::RootOut { rule: r.name.clone() });
                            }
                        }
                        Target::In(j) => {
                            if self.structure.parent(j) != Some(i) {
                                out.push(BmsViolation::InTargetNotChild {
                                    rule: r.name.clone(),
                                    membrane: i,
                                    target: j,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn check_vector(&self, r: &VectorMultiRule) -> Result<(), BmsError> {
        if r.0.len() != self.degree() {
            return Err(BmsError::Arity {
                expected: self.degree(),
                got: r.0.len(),
            });
        }
        for (idx, ri) in r.0.iter().enumerate() {
            for name in ri.support() {
                match self.rule_index.get(name) {
                    None => return Err(BmsError::UnknownRule(name.clone())),
                    Some(&(i, _)) if i != idx + 1 => {
                        return Err(BmsError::WrongMembrane {
                            rule: name.clone(),
                            membrane: idx + 1,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    fn check_config(&self, c: &Configuration) -> Result<(), BmsError> {
        if c.degree() != self.degree() {
            return Err(BmsError::Arity {
                expected: self.degree(),
                got: c.degree(),
            });
        }
        Ok(())
    }

    /// Regroups a flat multiset of (globally unique) rule names into a
    /// vector multi-rule.
    pub fn vector_from_step(&self, step: &Step) -> Result<VectorMultiRule, BmsError> {
        let mut v = VectorMultiRule::empty(self.degree());
        for (name, n) in step.iter() {
            let &(i, _) = self
                .rule_index
                .get(name)
                .ok_or_else(|| BmsError::UnknownRule(name.clone()))?;
            v.0[i - 1].insert(name.clone(), n.clone());
        }
        Ok(v)
    }

    /// Per-membrane accumulated `(lhsᵢ, rhsᵢ)` of a vector multi-rule.
    pub fn accumulate(
        &self,
        r: &VectorMultiRule,
    ) -> Result<Vec<RuleSides>, BmsError> {
        self.check_vector(r)?;
        Ok(r.0
            .iter()
            .map(|ri| {
                let mut lhs = Multiset::new();
                let mut rhs = Multiset::new();
                for (name, n) in ri.iter() {
                    let (_, rule) = self.rule(name).expect("checked");
                    lhs = lhs.sum(&rule.lhs.scalar_mul(n));
                    rhs = rhs.sum(&rule.rhs.scalar_mul(n));
                }
                (lhs, rhs)
            })
            .collect())
    }

    fn lhs_accumulated(&self, ri: &Multiset<String>) -> Multiset<String> {
        ri.iter().fold(Multiset::new(), |acc, (name, n)| {
            acc.sum(&self.rule(name).expect("checked").1.lhs.scalar_mul(n))
        })
    }

    /// Mode-enabledness of a vector multi-rule, by the extension
    /// definitions: max forbids extending any component, lmax only the
    /// nonempty ones.
    pub fn is_enabled(&self, c: &Configuration, r: &VectorMultiRule, mode: Mode) -> Result<bool, BmsError> {
        self.check_vector(r)?;
        self.check_config(c)?;
        let lhs: Vec<Multiset<String>> = r.0.iter().map(|ri| self.lhs_accumulated(ri)).collect();
        if !lhs.iter().zip(&c.0).all(|(l, w)| l.leq(w)) {
            return Ok(false);
        }
        for (idx, ri) in r.0.iter().enumerate() {
            let constrained = match mode {
                Mode::Free => false,
                Mode::Max => true,
                Mode::Lmax => !ri.is_empty(),
            };
            if !constrained {
                continue;
            }
            for rule in &self.rules[idx] {
                if lhs[idx].sum(&rule.lhs).leq(&c.0[idx]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Applies a free-enabled vector multi-rule, routing `a_out` objects to
    /// the parent and `a_in_j` objects to child `j`.
    pub fn evolve(&self, c: &Configuration, r: &VectorMultiRule) -> Result<Configuration, BmsError> {
        let acc = self.accumulate(r)?;
        self.check_config(c)?;
        let mut next = Vec::with_capacity(c.degree());
        for ((lhs, _), w) in acc.iter().zip(&c.0) {
            next.push(w.checked_sub(lhs).ok_or(BmsError::NotEnabled)?);
        }
        Ok(self.route(next, &acc))
    }

    fn route(
        &self,
        mut next: Vec<Multiset<String>>,
        acc: &[(Multiset<String>, Multiset<IndexedObject>)],
    ) -> Configuration {
        for (idx, (_, rhs)) in acc.iter().enumerate() {
            let i = idx + 1;
            for (o, n) in rhs.iter() {
                let dest = match o.target {
                    Target::Here => Some(i),
                    Target::Out => self.structure.parent(i),
                    Target::In(j) => (self.structure.parent(j) == Some(i)).then_some(j),
                };
                if let Some(d) = dest {
                    next[d - 1].insert(o.object.clone(), n.clone());
                }
            }
        }
        Configuration(next)
    }

    /// Free-enabled rule multisets of one membrane, each flagged with
    /// whether no further rule of that membrane fits.
    fn membrane_choices(&self, idx: usize, w: &Multiset<String>) -> Result<Vec<(Multiset<String>, bool)>, BmsError> {
        let rules = &self.rules[idx];
        let mut out = Vec::new();
        let mut counts = vec![0usize; rules.len()];
        self.extend_choices(rules, 0, &mut counts, w.clone(), &mut out)?;
        Ok(out)
    }

    fn extend_choices(
        &self,
        rules: &[EvolutionRule],
        k: usize,
        counts: &mut Vec<usize>,
        rest: Multiset<String>,
        out: &mut Vec<(Multiset<String>, bool)>,
    ) -> Result<(), BmsError> {
        if k == rules.len() {
            let maximal = rules.iter().all(|r| !r.lhs.leq(&rest));
            let chosen = Multiset::from_counts(
                rules
                    .iter()
                    .zip(counts.iter())
                    .map(|(r, &c)| (r.name.clone(), BigUint::from(c))),
            );
            out.push((chosen, maximal));
            return Ok(());
        }
        let lhs = &rules[k].lhs;
        let bound = if lhs.is_empty() {
            // Unbounded for an (invalid) empty lhs; allow a single use.
            BigUint::from(1u32)
        } else {
            lhs.iter()
                .map(|(a, n)| rest.count(a) / n)
                .min()
                .expect("nonempty lhs")
        };
        let bound = count_to_usize(&bound).ok_or(BmsError::TooLarge)?;
        let mut cur = rest;
        for c in 0..=bound {
            if c > 0 {
                cur = cur.checked_sub(lhs).expect("within bound");
            }
            counts[k] = c;
            self.extend_choices(rules, k + 1, counts, cur.clone(), out)?;
        }
        counts[k] = 0;
        Ok(())
    }

    /// All nonempty mode-enabled vector multi-rules at `c`.
    ///
    /// Membranes consume independently, so the set factorises into a
    /// product of per-membrane choices filtered by the mode.
    pub fn enabled_vector_rules(&self, c: &Configuration, mode: Mode) -> Result<BTreeSet<VectorMultiRule>, BmsError> {
        self.check_config(c)?;
        let mut per_membrane = Vec::with_capacity(self.degree());
        for (idx, w) in c.0.iter().enumerate() {
            let choices = self.membrane_choices(idx, w)?;
            let kept: Vec<Multiset<String>> = choices
                .into_iter()
                .filter(|(r, maximal)| match mode {
                    Mode::Free => true,
                    Mode::Max => *maximal,
                    Mode::Lmax => r.is_empty() || *maximal,
                })
                .map(|(r, _)| r)
                .collect();
            per_membrane.push(kept);
        }
        let mut out = BTreeSet::new();
        let mut current = Vec::with_capacity(self.degree());
        product(&per_membrane, &mut current, &mut |v| {
            let v = VectorMultiRule(v.to_vec());
            if !v.is_empty() {
                out.insert(v);
            }
        });
        Ok(out)
    }

    fn successors(&self, c: &Configuration, mode: Mode) -> Result<Vec<(Step, Configuration)>, BmsError> {
        let mut out = Vec::new();
        for r in self.enabled_vector_rules(c, mode)? {
            out.push((r.flatten(), self.evolve(c, &r)?));
        }
        Ok(out)
    }

    /// Mode-concurrent reachability graph; arcs are labelled by the
    /// flattened rule multiset `r₁ + … + r_m`.
    pub fn reachability_graph(&self, mode: Mode, limits: ExploreLimits) -> Result<Exploration<Configuration>, BmsError> {
        self.reachability_graph_with(mode, limits, Exec::default())
    }

    pub fn reachability_graph_with(
        &self,
        mode: Mode,
        limits: ExploreLimits,
        exec: Exec,
    ) -> Result<Exploration<Configuration>, BmsError> {
        if !limits.is_valid() {
            return Err(BmsError::InvalidLimits);
        }
        explore(&BmsSpace { bms: self, mode }, limits, exec)
    }
}

fn product<T: Clone, F: FnMut(&[T])>(sets: &[Vec<T>], current: &mut Vec<T>, emit: &mut F) {
    if current.len() == sets.len() {
        emit(current);
        return;
    }
    for x in &sets[current.len()] {
        current.push(x.clone());
        product(sets, current, emit);
        current.pop();
    }
}

struct BmsSpace<'a> {
    bms: &'a BasicMembraneSystem,
    mode: Mode,
}

impl StateSpace for BmsSpace<'_> {
    type State = Configuration;
    type Error = BmsError;

    fn initial(&self) -> Configuration {
        self.bms.initial.clone()
    }

    fn successors(&self, s: &Configuration) -> Result<Vec<(Step, Configuration)>, BmsError> {
        self.bms.successors(s, self.mode)
    }

    fn state_id(&self, s: &Configuration) -> String {
        s.to_string()
    }
}

// ---- `.bms` file layout ----

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BmsFile {
    objects: Vec<String>,
    structure: MembraneStructure,
    #[serde(default)]
    initial: BTreeMap<MembraneId, Multiset<String>>,
    #[serde(default)]
    rules: BTreeMap<MembraneId, Vec<RuleFile>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    name: String,
    lhs: Multiset<String>,
    rhs: Vec<RhsEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RhsEntry {
    object: String,
    target: Target,
    #[serde(with = "count_serde")]
    count: BigUint,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TargetRepr {
    Word(String),
    In {
        #[serde(rename = "in")]
        child: MembraneId,
    },
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Target::Here => TargetRepr::Word("here".into()),
            Target::Out => TargetRepr::Word("out".into()),
            Target::In(child) => TargetRepr::In { child },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match TargetRepr::deserialize(d)? {
            TargetRepr::Word(w) if w == "here" => Ok(Target::Here),
            TargetRepr::Word(w) if w == "out" => Ok(Target::Out),
            TargetRepr::Word(w) => Err(de::Error::custom(format!(
                "unknown target `{w}` (expected \"here\", \"out\" or {{\"in\": j}})"
            ))),
            TargetRepr::In { child } => Ok(Target::In(child)),
        }
    }
}

impl TryFrom<BmsFile> for BasicMembraneSystem {
    type Error = BmsError;

    fn try_from(f: BmsFile) -> Result<Self, BmsError> {
        let rules = f
            .rules
            .into_iter()
            .map(|(i, rs)| {
                let rs = rs
                    .into_iter()
                    .map(|r| {
                        let rhs = Multiset::from_counts(r.rhs.into_iter().map(|e| {
                            (
                                IndexedObject {
                                    object: e.object,
                                    target: e.target,
                                },
                                e.count,
                            )
                        }));
                        EvolutionRule::new(r.name, r.lhs, rhs)
                    })
                    .collect();
                (i, rs)
            })
            .collect();
        BasicMembraneSystem::new(f.objects, f.structure, f.initial, rules)
    }
}

impl From<BasicMembraneSystem> for BmsFile {
    fn from(b: BasicMembraneSystem) -> Self {
        let initial = b
            .initial
            .0
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_empty())
            .map(|(i, w)| (i + 1, w.clone()))
            .collect();
        let rules = b
            .rules
            .iter()
            .enumerate()
            .filter(|(_, rs)| !rs.is_empty())
            .map(|(i, rs)| {
                let rs = rs
                    .iter()
                    .map(|r| RuleFile {
                        name: r.name.clone(),
                        lhs: r.lhs.clone(),
                        rhs: r
                            .rhs
                            .iter()
                            .map(|(o, n)| RhsEntry {
                                object: o.object.clone(),
                                target: o.target,
                                count: n.clone(),
                            })
                            .collect(),
                    })
                    .collect();
                (i + 1, rs)
            })
            .collect();
        BmsFile {
            objects: b.objects.into_iter().collect(),
            structure: b.structure,
            initial,
            rules,
        }
    }
}
