//! Simulation, translation and region-based synthesis for basic membrane
//! systems and place/transition nets with localities.
//!
//! The crate is organised bottom-up:
//!
//! * [`multiset`]: exact multiset algebra for markings, steps and rule sides.
//! * [`transition_system`]: step transition systems and isomorphism checks.
//! * [`membrane_structure`]: rooted membrane trees.
//! * [`ptl_net`], [`membrane_system`]: the two execution models and their
//!   concurrent reachability graphs.
//! * [`translate`]: constructions between the two models.
//! * [`regions`], [`synthesis`]: the region cone and net synthesis.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod dot;
pub mod exec;
pub mod explore;
pub mod membrane_structure;
pub mod membrane_system;
pub mod multiset;
pub mod ptl_net;
pub mod regions;
pub mod synthesis;
pub mod transition_system;
pub mod translate;

pub use exec::Exec;
pub use explore::{Exploration, ExploreLimits};
pub use membrane_structure::{MembraneId, MembraneStructure, Relation};
pub use membrane_system::{
    BasicMembraneSystem, Configuration, EvolutionRule, IndexedObject, Target, VectorMultiRule,
};
pub use multiset::Multiset;
pub use ptl_net::{Marking, Mode, PtlNet};
pub use transition_system::{Step, StepTransitionSystem};
