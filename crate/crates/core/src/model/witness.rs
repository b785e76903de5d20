use num_bigint::BigUint;
use num_traits::Zero;

use super::semantics::{fire_unchecked, TransitionMultiset};
use super::{Configuration, ModelError, Protocol, Transition};

/// A replayable description of an execution.
///
/// `Repeat` compresses `count` iterations of `body` over a shared `base`:
/// if `base + consume →body base + produce`, then by monotonicity
/// `base + count·consume →* base + count·produce`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecutionWitness {
    Steps(Vec<Transition>),
    Concat(Vec<ExecutionWitness>),
    Repeat {
        body: Box<ExecutionWitness>,
        count: BigUint,
        base: Configuration,
        consume: Configuration,
        produce: Configuration,
    },
}

impl ExecutionWitness {
    pub fn empty() -> Self {
        ExecutionWitness::Steps(Vec::new())
    }

    /// Parikh image of the described execution.
    pub fn parikh(&self, p: &Protocol) -> Result<TransitionMultiset, ModelError> {
        match self {
            ExecutionWitness::Steps(steps) => super::parikh(p, steps),
            ExecutionWitness::Concat(parts) => {
                let mut pi = TransitionMultiset::empty(p.transitions().len());
                for w in parts {
                    pi.add_scaled(&w.parikh(p)?, &BigUint::from(1u32));
                }
                Ok(pi)
            }
            ExecutionWitness::Repeat { body, count, .. } => {
                let mut pi = TransitionMultiset::empty(p.transitions().len());
                pi.add_scaled(&body.parikh(p)?, count);
                Ok(pi)
            }
        }
    }

    /// Number of transitions the witness stands for.
    pub fn length(&self) -> BigUint {
        match self {
            ExecutionWitness::Steps(steps) => BigUint::from(steps.len()),
            ExecutionWitness::Concat(parts) => parts.iter().map(|w| w.length()).sum(),
            ExecutionWitness::Repeat { body, count, .. } => body.length() * count,
        }
    }

    /// Expands every `Repeat` into explicit iterations. Only sensible for
    /// small counts; used to cross-check the compressed form.
    pub fn unroll(&self) -> Vec<Transition> {
        match self {
            ExecutionWitness::Steps(steps) => steps.clone(),
            ExecutionWitness::Concat(parts) => parts.iter().flat_map(|w| w.unroll()).collect(),
            ExecutionWitness::Repeat { body, count, .. } => {
                let once = body.unroll();
                let mut out = Vec::new();
                let mut k = count.clone();
                while !k.is_zero() {
                    out.extend_from_slice(&once);
                    k -= 1u32;
                }
                out
            }
        }
    }
}

/// Replays `w` from `c` and returns the final configuration.
pub fn replay(p: &Protocol, c: &Configuration, w: &ExecutionWitness) -> Result<Configuration, ModelError> {
    match w {
        ExecutionWitness::Steps(steps) => {
            let mut cur = c.clone();
            for (i, t) in steps.iter().enumerate() {
                if p.transition_index(t).is_none() {
                    return Err(ModelError::UnknownTransition(format!("{t:?}")));
                }
                cur = fire_unchecked(&cur, t).ok_or_else(|| ModelError::NotEnabled {
                    transition: format!("step {i}: {}", p.show_transition(t)),
                    at: p.show(&cur),
                })?;
            }
            Ok(cur)
        }
        ExecutionWitness::Concat(parts) => parts.iter().try_fold(c.clone(), |cur, w| replay(p, &cur, w)),
        ExecutionWitness::Repeat { body, count, base, consume, produce } => {
            let dims = [base.dim(), consume.dim(), produce.dim()];
            if dims.iter().any(|&d| d != p.num_states()) {
                return Err(ModelError::RepeatMismatch("configuration dimension".into()));
            }
            let expected_start = base + &consume.scale(count);
            if &expected_start != c {
                return Err(ModelError::RepeatMismatch(format!(
                    "start {} differs from base + {count}·consume = {}",
                    p.show(c),
                    p.show(&expected_start)
                )));
            }
            let body_end = replay(p, &(base + consume), body)?;
            if body_end != base + produce {
                return Err(ModelError::RepeatMismatch(format!(
                    "body ends in {} instead of base + produce = {}",
                    p.show(&body_end),
                    p.show(&(base + produce))
                )));
            }
            Ok(base + &produce.scale(count))
        }
    }
}
