//! Behaviour-preserving constructions between basic membrane systems and
//! PTL-nets spanned over their membrane structure.
//!
//! Both directions return a [`TranslationMaps`] that relates net
//! transitions to rules (φ) and places to `(membrane, object)` pairs (ν),
//! which is what an isomorphism check between the two reachability graphs
//! needs.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::membrane_structure::{MembraneId, MembraneStructure, Relation};
use crate::membrane_system::{
    BasicMembraneSystem, BmsError, BmsViolation, Configuration, EvolutionRule, IndexedObject, Target, VectorMultiRule,
};
use crate::multiset::Multiset;
use crate::ptl_net::{Marking, NetArc, NetError, Node, PtlNet, SpanViolation};
use crate::transition_system::Step;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("membrane system is invalid: {}", join(.0))]
    InvalidSystem(Vec<BmsViolation>),
    #[error("membrane structure is invalid: {0}")]
    InvalidStructure(String),
    #[error("net is not spanned over the membrane structure: {}", join(.0))]
    NotSpanned(Vec<SpanViolation>),
    #[error("place `{0}` is not part of the translation")]
    ForeignPlace(String),
    #[error("object `{object}` of membrane {membrane} is not part of the translation")]
    ForeignObject { membrane: MembraneId, object: String },
    #[error("transition `{0}` is not part of the translation")]
    ForeignTransition(String),
    #[error("rule `{rule}` of membrane {membrane} is not part of the translation")]
    ForeignRule { membrane: MembraneId, rule: String },
    #[error("expected {expected} membranes, got {got}")]
    Arity { expected: usize, got: usize },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    System(#[from] BmsError),
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join("; ")
}

/// Where ν sends a place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceImage {
    pub membrane: MembraneId,
    pub object: String,
}

/// The correspondence between a net and a membrane system.
///
/// `phi` maps transition ids to rule names and doubles as a `--phi` file
/// for `check-iso`; `nu` maps each place to the membrane and object whose
/// multiplicity it holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationMaps {
    pub degree: usize,
    pub phi: BTreeMap<String, String>,
    pub nu: BTreeMap<String, PlaceImage>,
    /// Membrane of each transition (and of its rule).
    pub locations: BTreeMap<String, MembraneId>,
}

impl TranslationMaps {
    fn place_of(&self, membrane: MembraneId, object: &str) -> Option<&String> {
        self.nu
            .iter()
            .find(|(_, img)| img.membrane == membrane && img.object == object)
            .map(|(p, _)| p)
    }

    /// ν: regroups a marking into a configuration.
    pub fn marking_to_config(&self, m: &Marking) -> Result<Configuration, TranslateError> {
        let mut parts = vec![Multiset::new(); self.degree];
        for (p, n) in m.iter() {
            let img = self.nu.get(p).ok_or_else(|| TranslateError::ForeignPlace(p.clone()))?;
            parts[img.membrane - 1].insert(img.object.clone(), n.clone());
        }
        Ok(Configuration::new(parts))
    }

    /// ν⁻¹.
    pub fn config_to_marking(&self, c: &Configuration) -> Result<Marking, TranslateError> {
        if c.degree() != self.degree {
            return Err(TranslateError::Arity {
                expected: self.degree,
                got: c.degree(),
            });
        }
        let mut m = Marking::new();
        for (idx, w) in c.membranes().iter().enumerate() {
            for (a, n) in w.iter() {
                let p = self.place_of(idx + 1, a).ok_or_else(|| TranslateError::ForeignObject {
                    membrane: idx + 1,
                    object: a.clone(),
                })?;
                m.insert(p.clone(), n.clone());
            }
        }
        Ok(m)
    }

    /// ρ: the vector multi-rule whose i-th component collects the rules of
    /// the transitions located in membrane i.
    pub fn step_to_vector(&self, step: &Step) -> Result<VectorMultiRule, TranslateError> {
        let mut parts = vec![Multiset::new(); self.degree];
        for (t, n) in step.iter() {
            let (rule, i) = self
                .phi
                .get(t)
                .zip(self.locations.get(t))
                .ok_or_else(|| TranslateError::ForeignTransition(t.clone()))?;
            parts[i - 1].insert(rule.clone(), n.clone());
        }
        Ok(VectorMultiRule::new(parts))
    }

    /// ρ⁻¹.
    pub fn vector_to_step(&self, r: &VectorMultiRule) -> Result<Step, TranslateError> {
        if r.components().len() != self.degree {
            return Err(TranslateError::Arity {
                expected: self.degree,
                got: r.components().len(),
            });
        }
        let mut step = Step::new();
        for (idx, ri) in r.components().iter().enumerate() {
            for (rule, n) in ri.iter() {
                let t = self
                    .phi
                    .iter()
                    .find(|(t, r)| *r == rule && self.locations.get(*t) == Some(&(idx + 1)))
                    .map(|(t, _)| t)
                    .ok_or_else(|| TranslateError::ForeignRule {
                        membrane: idx + 1,
                        rule: rule.clone(),
                    })?;
                step.insert(t.clone(), n.clone());
            }
        }
        Ok(step)
    }
}

/// Name of the place holding object `a` of membrane `j`.
pub fn place_name(object: &str, membrane: MembraneId) -> String {
    format!("p^{object}_{membrane}")
}

/// Name of the transition simulating rule `r` of membrane `i`.
pub fn transition_name(rule: &str, membrane: MembraneId) -> String {
    format!("t^{rule}_{membrane}")
}

/// Builds the PTL-net with one place per (object, membrane) and one
/// transition per rule.
pub fn bms_to_ptl(bms: &BasicMembraneSystem) -> Result<(PtlNet, TranslationMaps), TranslateError> {
    let violations = bms.validate();
    if !violations.is_empty() {
        return Err(TranslateError::InvalidSystem(violations));
    }
    let mu = bms.structure();
    let mut places = Vec::new();
    let mut nu = BTreeMap::new();
    for j in mu.membranes() {
        for a in bms.objects() {
            let p = place_name(a, j);
            places.push(Node::at(p.clone(), j));
            nu.insert(
                p,
                PlaceImage {
                    membrane: j,
                    object: a.clone(),
                },
            );
        }
    }

    let mut transitions = Vec::new();
    let mut phi = BTreeMap::new();
    let mut locations = BTreeMap::new();
    let mut weights: BTreeMap<(String, String), BigUint> = BTreeMap::new();
    for i in mu.membranes() {
        for rule in bms.rules_in(i) {
            let t = transition_name(&rule.name, i);
            transitions.push(Node::at(t.clone(), i));
            phi.insert(t.clone(), rule.name.clone());
            locations.insert(t.clone(), i);
            for (a, n) in rule.lhs.iter() {
                *weights.entry((place_name(a, i), t.clone())).or_default() += n;
            }
            for (o, n) in rule.rhs.iter() {
                let j = match o.target {
                    Target::Here => i,
                    Target::Out => mu.parent(i).expect("validated"),
                    Target::In(j) => j,
                };
                *weights.entry((t.clone(), place_name(&o.object, j))).or_default() += n;
            }
        }
    }
    let arcs = weights
        .into_iter()
        .map(|((from, to), w)| NetArc::new(from, to, w))
        .collect();

    let mut initial = Marking::new();
    for (idx, w) in bms.initial().membranes().iter().enumerate() {
        for (a, n) in w.iter() {
            initial.insert(place_name(a, idx + 1), n.clone());
        }
    }
    let net = PtlNet::new(places, transitions, arcs, initial)?;
    Ok((
        net,
        TranslationMaps {
            degree: mu.degree(),
            phi,
            nu,
            locations,
        },
    ))
}

/// Builds the membrane system whose objects are the net's places and whose
/// rules are named after the transitions.
pub fn ptl_to_bms(net: &PtlNet, mu: &MembraneStructure) -> Result<(BasicMembraneSystem, TranslationMaps), TranslateError> {
    let tree = mu.validate_tree();
    if !tree.is_empty() {
        return Err(TranslateError::InvalidStructure(join(&tree)));
    }
    let span = net.check_spanned(mu);
    if !span.is_empty() {
        return Err(TranslateError::NotSpanned(span));
    }
    let loc = |id: &str| net.location(id).expect("spanned nets are fully located");

    let mut lhs: BTreeMap<&str, Multiset<String>> = BTreeMap::new();
    let mut rhs: BTreeMap<&str, Multiset<IndexedObject>> = BTreeMap::new();
    let arcs = net.arcs();
    for arc in &arcs {
        if let Some(t) = net.transition(&arc.to) {
            lhs.entry(t.id.as_str())
                .or_default()
                .insert(arc.from.clone(), arc.weight.clone());
        } else {
            let t = arc.from.as_str();
            let (lt, lp) = (loc(t), loc(&arc.to));
            let target = match mu.relation(lt, lp).expect("spanned") {
                Relation::Same => IndexedObject::here(arc.to.clone()),
                Relation::ChildOf => IndexedObject::out(arc.to.clone()),
                Relation::ParentOf => IndexedObject::into_child(arc.to.clone(), lp),
                Relation::Unrelated => unreachable!("spanned nets only produce across tree edges"),
            };
            rhs.entry(t).or_default().insert(target, arc.weight.clone());
        }
    }

    let mut rules: BTreeMap<MembraneId, Vec<EvolutionRule>> = BTreeMap::new();
    let mut phi = BTreeMap::new();
    let mut locations = BTreeMap::new();
    for t in net.transitions() {
        let i = loc(&t.id);
        let rule = EvolutionRule::new(
            t.id.clone(),
            lhs.remove(t.id.as_str()).unwrap_or_default(),
            rhs.remove(t.id.as_str()).unwrap_or_default(),
        );
        rules.entry(i).or_default().push(rule);
        phi.insert(t.id.clone(), t.id.clone());
        locations.insert(t.id.clone(), i);
    }

    let nu: BTreeMap<String, PlaceImage> = net
        .places()
        .iter()
        .map(|p| {
            (
                p.id.clone(),
                PlaceImage {
                    membrane: loc(&p.id),
                    object: p.id.clone(),
                },
            )
        })
        .collect();
    let maps = TranslationMaps {
        degree: mu.degree(),
        phi,
        nu,
        locations,
    };
    let initial: BTreeMap<MembraneId, Multiset<String>> = maps
        .marking_to_config(net.initial_marking())?
        .membranes()
        .iter()
        .enumerate()
        .map(|(idx, w)| (idx + 1, w.clone()))
        .collect();
    let objects = net.places().iter().map(|p| p.id.clone());
    let bms = BasicMembraneSystem::new(objects, mu.clone(), initial, rules)?;
    Ok((bms, maps))
}
