//! Membrane structures: rooted trees on the membranes `1..=m`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub type MembraneId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("membrane {0} is out of range")]
    OutOfRange(MembraneId),
}

/// How membrane `i` relates to membrane `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Same,
    /// `i = parent(j)`.
    ParentOf,
    /// `j = parent(i)`.
    ChildOf,
    Unrelated,
}

impl Relation {
    /// Same membrane or across a single tree edge.
    pub fn is_adjacent_or_same(self) -> bool {
        !matches!(self, Relation::Unrelated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureViolation {
    ZeroDegree,
    OutOfRange { membrane: MembraneId },
    SelfParent { membrane: MembraneId },
    NoRoot,
    MultipleRoots { roots: Vec<MembraneId> },
    Cycle { membranes: Vec<MembraneId> },
}

impl fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureViolation::ZeroDegree => write!(f, "degree must be at least 1"),
            StructureViolation::OutOfRange { membrane } => {
                write!(f, "membrane {membrane} is outside 1..=degree")
            }
            StructureViolation::SelfParent { membrane } => {
                write!(f, "membrane {membrane} is its own parent")
            }
            StructureViolation::NoRoot => write!(f, "no root membrane"),
            StructureViolation::MultipleRoots { roots } => {
                write!(f, "several root membranes: {roots:?}")
            }
            StructureViolation::Cycle { membranes } => {
                write!(f, "parent cycle through membranes {membranes:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembraneStructure {
    degree: usize,
    #[serde(default)]
    parents: BTreeMap<MembraneId, MembraneId>,
}

impl MembraneStructure {
    /// Builds a structure from a child→parent map. Not checked; see
    /// [`MembraneStructure::validate_tree`].
    pub fn new(degree: usize, parents: impl IntoIterator<Item = (MembraneId, MembraneId)>) -> Self {
        Self {
            degree,
            parents: parents.into_iter().collect(),
        }
    }

    /// The one-membrane structure.
    pub fn single() -> Self {
        Self::new(1, [])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn membranes(&self) -> impl Iterator<Item = MembraneId> {
        1..=self.degree
    }

    pub fn contains(&self, i: MembraneId) -> bool {
        (1..=self.degree).contains(&i)
    }

    pub fn parent(&self, j: MembraneId) -> Option<MembraneId> {
        self.parents.get(&j).copied()
    }

    pub fn parents(&self) -> &BTreeMap<MembraneId, MembraneId> {
        &self.parents
    }

    pub fn children(&self, i: MembraneId) -> impl Iterator<Item = MembraneId> + '_ {
        self.parents
            .iter()
            .filter(move |(_, p)| **p == i)
            .map(|(c, _)| *c)
    }

    /// The smallest membrane without a parent.
    pub fn root(&self) -> Option<MembraneId> {
        self.membranes().find(|i| !self.parents.contains_key(i))
    }

    /// Distance to the root; `None` for membranes on or below a cycle.
    pub fn depth(&self, i: MembraneId) -> Option<usize> {
        let mut cur = i;
        for d in 0..=self.degree {
            match self.parents.get(&cur) {
                None => return Some(d),
                Some(&p) => cur = p,
            }
        }
        None
    }

    pub fn validate_tree(&self) -> Vec<StructureViolation> {
        let mut out = Vec::new();
        if self.degree == 0 {
            out.push(StructureViolation::ZeroDegree);
        }
        for (&c, &p) in &self.parents {
            for m in [c, p] {
                if !self.contains(m) {
                    out.push(StructureViolation::OutOfRange { membrane: m });
                }
            }
            if c == p {
                out.push(StructureViolation::SelfParent { membrane: c });
            }
        }
        out.dedup();
        if !out.is_empty() {
            return out;
        }
        let roots: Vec<_> = self
            .membranes()
            .filter(|i| !self.parents.contains_key(i))
            .collect();
        match roots.len() {
            0 => out.push(StructureViolation::NoRoot),
            1 => {}
            _ => out.push(StructureViolation::MultipleRoots { roots }),
        }
        let mut reported = vec![false; self.degree + 1];
        for start in self.membranes() {
            if self.depth(start).is_some() || reported[start] {
                continue;
            }
            // Walk up until a membrane repeats; the repeated suffix is the cycle.
            let mut path = vec![start];
            let mut cur = start;
            while let Some(&p) = self.parents.get(&cur) {
                if let Some(pos) = path.iter().position(|&x| x == p) {
                    let mut cycle = path[pos..].to_vec();
                    if !cycle.iter().any(|&x| reported[x]) {
                        for &x in &cycle {
                            reported[x] = true;
                        }
                        cycle.sort_unstable();
                        out.push(StructureViolation::Cycle { membranes: cycle });
                    }
                    break;
                }
                path.push(p);
                cur = p;
            }
        }
        out
    }

    pub fn relation(&self, i: MembraneId, j: MembraneId) -> Result<Relation, StructureError> {
        for m in [i, j] {
            if !self.contains(m) {
                return Err(StructureError::OutOfRange(m));
            }
        }
        Ok(if i == j {
            Relation::Same
        } else if self.parent(j) == Some(i) {
            Relation::ParentOf
        } else if self.parent(i) == Some(j) {
            Relation::ChildOf
        } else {
            Relation::Unrelated
        })
    }
}
