//! Reachability at fixed population size, stable sets and their ideal
//! decompositions, and threshold verification.

mod coverability;
mod graph;
mod ideal;

use thiserror::Error;

use crate::model::{Configuration, ModelError};

pub use coverability::{
    backward_coverability, bad_targets, covers_some, cylinder_avoids, unstable_basis, CoverabilityBasis,
};
pub use graph::{
    evaluate_input, is_stable, reachable_configs, verify_threshold, Counterexample, InputValue, ReachGraph, Verdict,
};
pub use ideal::{
    complement_of_upward, decomposition_from_file, decomposition_to_file, describe, ideal_from_file, ideal_member,
    ideal_to_file, small_basis_constant, small_basis_norm_bound, stable_set_ideals, DecompositionFile, Ideal,
    IdealDecomposition, IdealFile, IdealForm, Polarity,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReachError {
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// All configurations over `states` states with exactly `size` agents, in
/// lexicographic order of count vectors.
pub fn configurations_of_size(states: usize, size: u64) -> Vec<Configuration> {
    fn go(states: usize, left: u64, cur: &mut Vec<u64>, out: &mut Vec<Configuration>) {
        if cur.len() + 1 == states {
            cur.push(left);
            out.push(Configuration::from_small(cur));
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            go(states, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if states > 0 {
        go(states, size, &mut Vec::new(), &mut out);
    }
    out
}
