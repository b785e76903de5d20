//! Exact analysis of single-input population protocols.
//!
//! The crate decides threshold predicates `x ≥ η` at fixed population sizes,
//! computes finite ideal decompositions of the stable sets, Hilbert bases of
//! the potentially-realisable-multiset system, and builds and checks pumping
//! certificates that bound the threshold a protocol can compute.
//!
//! Input sizes start at 2: constant-true protocols compute `x ≥ 2`.

pub mod bb;
pub mod dioph;
pub mod generators;
pub mod limits;
pub mod model;
pub mod pump;
pub mod pow2;
pub mod reach;

pub use limits::Limits;
pub use model::{
    Configuration, ExecutionWitness, ModelError, Pair, Protocol, StateId, Transition, TransitionMultiset,
};
