use std::collections::BTreeSet;

use num_bigint::BigUint;

use super::PumpError;
use crate::model::{fire, replay, Configuration, ExecutionWitness, Protocol, StateId, Transition};

/// First transition (in canonical order) whose left pair lies inside `supp`
/// and whose right pair leaves it.
pub fn find_escaping_transition(p: &Protocol, supp: &BTreeSet<StateId>) -> Result<Transition, PumpError> {
    if !supp.contains(&p.input_state()) {
        return Err(PumpError::PreconditionFailed("the support must contain the input state".into()));
    }
    if supp.len() >= p.num_states() {
        return Err(PumpError::PreconditionFailed("the support already contains every state".into()));
    }
    p.transitions()
        .iter()
        .find(|t| {
            supp.contains(&t.pre.first())
                && supp.contains(&t.pre.second())
                && !(supp.contains(&t.post.first()) && supp.contains(&t.post.second()))
        })
        .copied()
        .ok_or_else(|| {
            let names: Vec<&str> = supp.iter().map(|&q| p.state_name(q)).collect();
            PumpError::NoEscape(format!("no transition leaves {{{}}}; strip uncoverable states first", names.join(",")))
        })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saturation {
    pub j: u32,
    pub sigma: Vec<Transition>,
    /// `IC(3^j) →σ result`, with every state populated.
    pub result: Configuration,
}

/// Builds `IC(3^j) →σ C` with `C` 1-saturated: from `IC(3^k) →σ_k C_k`, three
/// copies give `3·C_k`, and an escaping transition fired on `2·C_k` adds a new
/// state, so `σ_{k+1} = σ_k σ_k σ_k t` and `|σ_j| = (3^j − 1)/2`.
pub fn saturation_sequence(p: &Protocol) -> Result<Saturation, PumpError> {
    if !p.is_leaderless() {
        return Err(PumpError::NotLeaderless);
    }
    let mut c = p.input_config(&BigUint::from(1u32));
    let mut sigma: Vec<Transition> = Vec::new();
    let mut j = 0;
    loop {
        let supp: BTreeSet<StateId> = c.support().into_iter().collect();
        if supp.len() == p.num_states() {
            break;
        }
        let t = find_escaping_transition(p, &supp)?;
        let doubled = &c + &c;
        let fired = fire(p, &doubled, &t)?;
        c = &c + &fired;
        let mut next = Vec::with_capacity(3 * sigma.len() + 1);
        for _ in 0..3 {
            next.extend_from_slice(&sigma);
        }
        next.push(t);
        sigma = next;
        j += 1;
    }
    Ok(Saturation { j, sigma, result: c })
}

impl Saturation {
    /// Replays `σ` from `IC(3^j)` and checks it lands on the result.
    pub fn verify(&self, p: &Protocol) -> Result<(), PumpError> {
        let start = p.input_config(&BigUint::from(3u32).pow(self.j));
        let end = replay(p, &start, &ExecutionWitness::Steps(self.sigma.clone()))?;
        if end != self.result {
            return Err(PumpError::InvariantViolated(format!("σ ends in {} instead of {}", p.show(&end), p.show(&self.result))));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{flock_binary, flock_unary};

    #[test]
    fn escaping_transitions() {
        let p1 = flock_binary(1).unwrap();
        assert_eq!(find_escaping_transition(&p1, &BTreeSet::from([1])).unwrap(), Transition::new(1, 1, 0, 2));
        let p2 = flock_binary(2).unwrap();
        assert_eq!(find_escaping_transition(&p2, &BTreeSet::from([0, 1, 2])).unwrap(), Transition::new(2, 2, 0, 3));
        assert!(matches!(
            find_escaping_transition(&p1, &BTreeSet::from([0, 1, 2])),
            Err(PumpError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn flock_one_saturates_in_one_round() {
        let p = flock_binary(1).unwrap();
        let s = saturation_sequence(&p).unwrap();
        assert_eq!(s.j, 1);
        assert_eq!(s.sigma, vec![Transition::new(1, 1, 0, 2)]);
        assert_eq!(s.result, Configuration::from_small(&[1, 1, 1]));
        s.verify(&p).unwrap();
    }

    #[test]
    fn lengths_follow_the_recurrence() {
        for p in [flock_binary(2).unwrap(), flock_binary(3).unwrap(), flock_unary(2).unwrap()] {
            let s = saturation_sequence(&p).unwrap();
            assert!(s.j as usize <= p.num_states());
            assert_eq!(s.sigma.len() as u64, (3u64.pow(s.j) - 1) / 2);
            assert!(s.result.is_saturated(&BigUint::from(1u32)));
            s.verify(&p).unwrap();
        }
    }

    #[test]
    fn one_state_protocol_is_already_saturated() {
        let p = Protocol::leaderless(vec!["q".into()], vec![Transition::new(0, 0, 0, 0)], 0, vec![true]).unwrap();
        let s = saturation_sequence(&p).unwrap();
        assert_eq!((s.j, s.sigma.len()), (0, 0));
        assert_eq!(s.result, Configuration::from_small(&[1]));
    }

    #[test]
    fn uncoverable_states_block_saturation() {
        // state z is never produced
        let p = Protocol::leaderless(
            vec!["x".into(), "z".into()],
            vec![Transition::new(0, 0, 0, 0), Transition::new(0, 1, 0, 1), Transition::new(1, 1, 1, 1)],
            0,
            vec![false, true],
        )
        .unwrap();
        assert!(matches!(saturation_sequence(&p), Err(PumpError::NoEscape(_))));
    }
}
