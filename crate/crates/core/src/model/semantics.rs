use std::collections::{BTreeSet, HashSet, VecDeque};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use super::{Configuration, ModelError, Protocol, StateId, Transition};

/// `L + i·I(x)`, rejecting populations with fewer than two agents.
pub fn initial_configuration(p: &Protocol, input: &BigUint) -> Result<Configuration, ModelError> {
    let c = p.input_config(input);
    if c.size() < BigUint::from(2u32) {
        return Err(ModelError::TooSmall { size: c.size() });
    }
    Ok(c)
}

pub fn is_enabled(c: &Configuration, t: &Transition) -> bool {
    let (p, q) = (t.pre.first(), t.pre.second());
    if p == q {
        *c.get(p) >= BigUint::from(2u32)
    } else {
        !c.get(p).is_zero() && !c.get(q).is_zero()
    }
}

/// Fires `t` at `c`. The transition must belong to `p`.
pub fn fire(p: &Protocol, c: &Configuration, t: &Transition) -> Result<Configuration, ModelError> {
    if p.transition_index(t).is_none() {
        return Err(ModelError::UnknownTransition(format!("{t:?}")));
    }
    fire_unchecked(c, t).ok_or_else(|| ModelError::NotEnabled {
        transition: p.show_transition(t),
        at: p.show(c),
    })
}

/// Fires `t` without checking membership in a protocol.
pub(crate) fn fire_unchecked(c: &Configuration, t: &Transition) -> Option<Configuration> {
    if !is_enabled(c, t) {
        return None;
    }
    let one = BigUint::one();
    let mut next = c.clone();
    for q in [t.pre.first(), t.pre.second()] {
        let v = next.get(q) - &one;
        next.set(q, v);
    }
    for q in [t.post.first(), t.post.second()] {
        next.add_to(q, &one);
    }
    Some(next)
}

/// `Some(b)` if every populated state has output `b`, `None` otherwise.
///
/// The empty multiset has no output.
pub fn output_of(p: &Protocol, c: &Configuration) -> Option<bool> {
    let mut seen: Option<bool> = None;
    for q in c.support() {
        match seen {
            None => seen = Some(p.output(q)),
            Some(b) if b != p.output(q) => return None,
            _ => {}
        }
    }
    seen
}

/// Net per-state change of a transition or of a multiset of transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Displacement {
    delta: Vec<BigInt>,
}

impl Displacement {
    pub fn zero(states: usize) -> Self {
        Self { delta: vec![BigInt::zero(); states] }
    }

    pub fn of_transition(states: usize, t: &Transition) -> Self {
        Self { delta: (0..states).map(|q| BigInt::from(t.delta(q))).collect() }
    }

    pub fn get(&self, q: StateId) -> &BigInt {
        &self.delta[q]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.delta
    }

    pub fn sum(&self) -> BigInt {
        self.delta.iter().sum()
    }

    fn add_scaled(&mut self, other: &Displacement, k: &BigUint) {
        let k = BigInt::from(k.clone());
        for (a, b) in self.delta.iter_mut().zip(&other.delta) {
            *a += b * &k;
        }
    }

    /// `c + self`, or `None` if a coordinate would be negative.
    pub fn apply(&self, c: &Configuration) -> Option<Configuration> {
        let mut counts = Vec::with_capacity(c.dim());
        for (q, d) in self.delta.iter().enumerate() {
            let v = BigInt::from(c.get(q).clone()) + d;
            match v.sign() {
                Sign::Minus => return None,
                _ => counts.push(v.magnitude().clone()),
            }
        }
        Some(Configuration::from_counts(counts))
    }
}

/// Parikh image of a transition sequence: multiplicities indexed by the
/// protocol's canonical transition order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionMultiset {
    counts: Vec<BigUint>,
}

impl TransitionMultiset {
    pub fn empty(transitions: usize) -> Self {
        Self { counts: vec![BigUint::zero(); transitions] }
    }

    pub fn from_counts(counts: Vec<BigUint>) -> Self {
        Self { counts }
    }

    pub fn from_small(counts: &[u64]) -> Self {
        Self { counts: counts.iter().map(|&c| BigUint::from(c)).collect() }
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, t: usize) -> &BigUint {
        &self.counts[t]
    }

    pub fn add(&mut self, t: usize, k: &BigUint) {
        self.counts[t] += k;
    }

    pub fn add_scaled(&mut self, other: &TransitionMultiset, k: &BigUint) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b * k;
        }
    }

    /// `|π|`, the total multiplicity.
    pub fn size(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(Zero::is_zero)
    }
}

/// Displacement of a single transition.
pub fn displacement(p: &Protocol, t: &Transition) -> Displacement {
    Displacement::of_transition(p.num_states(), t)
}

/// Multiplicity-weighted sum of transition displacements.
pub fn multiset_displacement(p: &Protocol, pi: &TransitionMultiset) -> Displacement {
    let mut d = Displacement::zero(p.num_states());
    for (t, k) in p.transitions().iter().zip(pi.counts()) {
        if !k.is_zero() {
            d.add_scaled(&displacement(p, t), k);
        }
    }
    d
}

pub fn parikh(p: &Protocol, sigma: &[Transition]) -> Result<TransitionMultiset, ModelError> {
    let mut pi = TransitionMultiset::empty(p.transitions().len());
    let one = BigUint::one();
    for t in sigma {
        let idx = p.transition_index(t).ok_or_else(|| ModelError::UnknownTransition(format!("{t:?}")))?;
        pi.add(idx, &one);
    }
    Ok(pi)
}

/// Potential step `c ⇒^π c + Δ(π)`. Only the end point must be non-negative.
pub fn apply_parikh(p: &Protocol, c: &Configuration, pi: &TransitionMultiset) -> Result<Configuration, ModelError> {
    multiset_displacement(p, pi).apply(c).ok_or(ModelError::NegativeCount)
}

/// Orders `π` into a firing sequence from a `2|π|`-saturated configuration.
///
/// Any order works under saturation; transitions are emitted in canonical
/// order, each repeated by its multiplicity.
pub fn realize(p: &Protocol, c: &Configuration, pi: &TransitionMultiset) -> Result<Vec<Transition>, ModelError> {
    let need = pi.size() * 2u32;
    if !c.is_saturated(&need) {
        return Err(ModelError::NotSaturated { required: need });
    }
    let mut sigma = Vec::new();
    for (t, k) in p.transitions().iter().zip(pi.counts()) {
        let mut k = k.clone();
        while !k.is_zero() {
            sigma.push(*t);
            k -= 1u32;
        }
    }
    Ok(sigma)
}

/// States that some reachable configuration populates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverable {
    pub states: BTreeSet<StateId>,
    /// `false` when computed by bounded exploration (protocols with leaders).
    pub exact: bool,
}

/// Inputs explored when approximating coverability for protocols with leaders.
const LEADER_COVER_INPUTS: u64 = 8;
const LEADER_COVER_NODES: usize = 20_000;

pub fn coverable_states(p: &Protocol) -> Coverable {
    if p.is_leaderless() {
        // Leaderless initial configurations scale, so any two populated states
        // can meet: the support closure is exact.
        let mut set = BTreeSet::from([p.input_state()]);
        loop {
            let before = set.len();
            for t in p.transitions() {
                if set.contains(&t.pre.first()) && set.contains(&t.pre.second()) {
                    set.insert(t.post.first());
                    set.insert(t.post.second());
                }
            }
            if set.len() == before {
                return Coverable { states: set, exact: true };
            }
        }
    }
    let mut states = BTreeSet::new();
    for i in 2..=LEADER_COVER_INPUTS {
        let start = p.input_config(&BigUint::from(i));
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            states.extend(c.support());
            for t in p.transitions() {
                if let Some(next) = fire_unchecked(&c, t) {
                    if seen.len() < LEADER_COVER_NODES && seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    Coverable { states, exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{flock_binary, flock_unary};
    use crate::model::Pair;

    fn t11() -> Transition {
        Transition::new(1, 1, 0, 2)
    }

    #[test]
    fn initial_configuration_examples() {
        let p2 = flock_binary(2).unwrap();
        let c = initial_configuration(&p2, &BigUint::from(5u32)).unwrap();
        assert_eq!(p2.show(&c), "⟦5·1⟧");
        assert!(matches!(
            initial_configuration(&p2, &BigUint::zero()),
            Err(ModelError::TooSmall { .. })
        ));
    }

    #[test]
    fn initial_configuration_with_leaders() {
        let states = vec!["l".to_string(), "x".to_string()];
        let p = Protocol::new(states, vec![], Configuration::unit(2, 0), "x", 1, vec![false, true]).unwrap();
        let c = initial_configuration(&p, &BigUint::from(2u32)).unwrap();
        assert_eq!(c, Configuration::from_small(&[1, 2]));
        // a single leader plus one input agent is already a valid population
        assert!(initial_configuration(&p, &BigUint::one()).is_ok());
    }

    #[test]
    fn fire_examples() {
        let p1 = flock_binary(1).unwrap();
        let c = Configuration::from_small(&[0, 2, 0]);
        assert_eq!(fire(&p1, &c, &t11()).unwrap(), Configuration::from_small(&[1, 0, 1]));
        let c = Configuration::from_small(&[1, 1, 0]);
        assert!(matches!(fire(&p1, &c, &t11()), Err(ModelError::NotEnabled { .. })));
        let id = Transition::identity(Pair::new(0, 1));
        assert_eq!(fire(&p1, &c, &id).unwrap(), c);
    }

    #[test]
    fn output_examples() {
        let p2 = flock_binary(2).unwrap();
        // states 0,1,2,4
        assert_eq!(output_of(&p2, &Configuration::from_small(&[0, 0, 0, 3])), Some(true));
        assert_eq!(output_of(&p2, &Configuration::from_small(&[1, 1, 1, 0])), Some(false));
        assert_eq!(output_of(&p2, &Configuration::from_small(&[0, 1, 0, 1])), None);
    }

    #[test]
    fn displacement_examples() {
        let states = vec!["p".to_string(), "q".to_string(), "r".to_string()];
        let p = Protocol::leaderless(states, vec![Transition::new(0, 1, 0, 2)], 0, vec![false; 3]).unwrap();
        let d = displacement(&p, &Transition::new(0, 1, 0, 2));
        assert_eq!(d.entries(), &[BigInt::from(0), BigInt::from(-1), BigInt::from(1)]);
        assert!(displacement(&p, &Transition::identity(Pair::new(1, 2))).entries().iter().all(Zero::is_zero));

        let p1 = flock_binary(1).unwrap();
        let pi = parikh(&p1, &[t11(), t11()]).unwrap();
        let d = multiset_displacement(&p1, &pi);
        assert_eq!(d.entries(), &[BigInt::from(2), BigInt::from(-4), BigInt::from(2)]);
    }

    #[test]
    fn parikh_counts() {
        let p1 = flock_binary(1).unwrap();
        assert!(parikh(&p1, &[]).unwrap().is_empty());
        let u = Transition::new(0, 2, 2, 2);
        let pi = parikh(&p1, &[t11(), t11(), u]).unwrap();
        assert_eq!(pi.size(), BigUint::from(3u32));
        assert_eq!(pi.get(p1.transition_index(&t11()).unwrap()), &BigUint::from(2u32));
        assert_eq!(pi.get(p1.transition_index(&u).unwrap()), &BigUint::one());
    }

    #[test]
    fn parikh_matches_replay() {
        let p1 = flock_binary(1).unwrap();
        let start = Configuration::from_small(&[0, 4, 0]);
        let mid = fire(&p1, &start, &t11()).unwrap();
        let end = fire(&p1, &mid, &t11()).unwrap();
        assert_eq!(end, Configuration::from_small(&[2, 0, 2]));
        let pi = parikh(&p1, &[t11(), t11()]).unwrap();
        assert_eq!(apply_parikh(&p1, &start, &pi).unwrap(), end);
    }

    #[test]
    fn apply_parikh_examples() {
        let p1 = flock_binary(1).unwrap();
        let pi = parikh(&p1, &[t11()]).unwrap();
        let c = Configuration::from_small(&[0, 2, 0]);
        assert_eq!(apply_parikh(&p1, &c, &pi).unwrap(), Configuration::from_small(&[1, 0, 1]));
        let c0 = Configuration::from_small(&[2, 0, 0]);
        assert!(matches!(apply_parikh(&p1, &c0, &pi), Err(ModelError::NegativeCount)));
        let empty = TransitionMultiset::empty(p1.transitions().len());
        assert_eq!(apply_parikh(&p1, &c, &empty).unwrap(), c);
    }

    #[test]
    fn realize_examples() {
        let p1 = flock_binary(1).unwrap();
        let c = Configuration::from_small(&[2, 2, 2]);
        let pi = parikh(&p1, &[t11()]).unwrap();
        let sigma = realize(&p1, &c, &pi).unwrap();
        assert_eq!(sigma, vec![t11()]);
        let end = sigma.iter().try_fold(c.clone(), |c, t| fire(&p1, &c, t)).unwrap();
        assert_eq!(end, Configuration::from_small(&[3, 0, 3]));

        let empty = TransitionMultiset::empty(p1.transitions().len());
        assert!(realize(&p1, &c, &empty).unwrap().is_empty());

        let small = Configuration::from_small(&[1, 2, 2]);
        assert!(matches!(realize(&p1, &small, &pi), Err(ModelError::NotSaturated { .. })));
    }

    #[test]
    fn realize_on_saturated_flock2() {
        let p2 = flock_binary(2).unwrap();
        let c = Configuration::from_small(&[4, 4, 4, 4]);
        let pi = parikh(&p2, &[Transition::new(1, 1, 0, 2), Transition::new(2, 2, 0, 3)]).unwrap();
        let sigma = realize(&p2, &c, &pi).unwrap();
        assert_eq!(sigma.len(), 2);
        let end = sigma.iter().try_fold(c.clone(), |c, t| fire(&p2, &c, t)).unwrap();
        assert_eq!(end, apply_parikh(&p2, &c, &pi).unwrap());
    }

    #[test]
    fn coverable_examples() {
        let p1 = flock_binary(1).unwrap();
        let cov = coverable_states(&p1);
        assert!(cov.exact);
        assert_eq!(cov.states, BTreeSet::from([0, 1, 2]));

        let p = flock_unary(2).unwrap();
        assert_eq!(coverable_states(&p).states.len(), 5);

        // y,y -> x,x never fires from the input state x
        let states = vec!["x".to_string(), "y".to_string()];
        let p = Protocol::leaderless(states, vec![Transition::new(1, 1, 0, 0)], 0, vec![false, true]).unwrap();
        assert_eq!(coverable_states(&p).states, BTreeSet::from([0]));
    }
}
