//! Protocols, configurations and their exact operational semantics.

mod config;
pub mod format;
mod protocol;
mod semantics;
mod witness;

use num_bigint::BigUint;
use thiserror::Error;

pub use config::Configuration;
pub use protocol::{normalize_protocol, Normalized, Pair, Protocol, Transition};
pub use semantics::{
    apply_parikh, coverable_states, displacement, fire, initial_configuration, is_enabled, multiset_displacement,
    output_of, parikh, realize, Coverable, Displacement, TransitionMultiset,
};
pub use witness::{replay, ExecutionWitness};

/// Index of a state in its protocol's state list.
pub type StateId = usize;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed protocol: {0}")]
    Malformed(String),
    #[error("stripping uncoverable states would remove input state `{0}`")]
    InputStateRemoved(String),
    #[error("initial configuration has {size} agents, at least 2 are required")]
    TooSmall { size: BigUint },
    #[error("transition {transition} is not enabled at {at}")]
    NotEnabled { transition: String, at: String },
    #[error("transition {0} does not belong to the protocol")]
    UnknownTransition(String),
    #[error("potential step leaves a negative count")]
    NegativeCount,
    #[error("configuration is not {required}-saturated")]
    NotSaturated { required: BigUint },
    #[error("repeat witness mismatch: {0}")]
    RepeatMismatch(String),
    #[error("format error: {0}")]
    Format(String),
}
