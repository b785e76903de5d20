use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{Configuration, ModelError, StateId};

/// An unordered pair of states, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair(StateId, StateId);

impl Pair {
    pub fn new(a: StateId, b: StateId) -> Self {
        if a <= b {
            Pair(a, b)
        } else {
            Pair(b, a)
        }
    }

    pub fn first(self) -> StateId {
        self.0
    }

    pub fn second(self) -> StateId {
        self.1
    }

    pub fn contains(self, q: StateId) -> bool {
        self.0 == q || self.1 == q
    }

    /// How many of the two agents sit in `q` (0, 1 or 2).
    pub fn multiplicity(self, q: StateId) -> u32 {
        (self.0 == q) as u32 + (self.1 == q) as u32
    }

    pub fn as_config(self, states: usize) -> Configuration {
        Configuration::from_pairs(states, &[(self.0, 1), (self.1, 1)])
    }

    /// All unordered pairs over `n` states in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Pair> {
        (0..n).flat_map(move |a| (a..n).map(move |b| Pair(a, b)))
    }
}

/// `pre ↦ post`: two interacting agents in `pre` move to `post`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub pre: Pair,
    pub post: Pair,
}

impl Transition {
    pub fn new(p: StateId, q: StateId, p2: StateId, q2: StateId) -> Self {
        Self { pre: Pair::new(p, q), post: Pair::new(p2, q2) }
    }

    pub fn identity(pair: Pair) -> Self {
        Self { pre: pair, post: pair }
    }

    pub fn is_identity(&self) -> bool {
        self.pre == self.post
    }

    /// Net change of the count of `q` when the transition fires.
    pub fn delta(&self, q: StateId) -> i64 {
        self.post.multiplicity(q) as i64 - self.pre.multiplicity(q) as i64
    }
}

/// A single-input population protocol, possibly with leaders.
///
/// Transitions are kept sorted and deduplicated; that order is the canonical
/// transition order used for tie-breaking and serialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Protocol {
    states: Vec<String>,
    transitions: Vec<Transition>,
    leaders: Configuration,
    input_var: String,
    input_state: StateId,
    outputs: Vec<bool>,
}

impl Protocol {
    pub fn new(
        states: Vec<String>,
        transitions: Vec<Transition>,
        leaders: Configuration,
        input_var: impl Into<String>,
        input_state: StateId,
        outputs: Vec<bool>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        if n == 0 {
            return Err(ModelError::Malformed("a protocol needs at least one state".into()));
        }
        let distinct: BTreeSet<&String> = states.iter().collect();
        if distinct.len() != n {
            return Err(ModelError::Malformed("state names must be distinct".into()));
        }
        if outputs.len() != n {
            return Err(ModelError::Malformed(format!(
                "output map has {} entries for {n} states",
                outputs.len()
            )));
        }
        if input_state >= n {
            return Err(ModelError::Malformed("input state out of range".into()));
        }
        if leaders.dim() != n {
            return Err(ModelError::Malformed("leader multiset has wrong dimension".into()));
        }
        for t in &transitions {
            if [t.pre.0, t.pre.1, t.post.0, t.post.1].iter().any(|&q| q >= n) {
                return Err(ModelError::Malformed("transition refers to an unknown state".into()));
            }
        }
        let mut transitions = transitions;
        transitions.sort();
        transitions.dedup();
        Ok(Self { states, transitions, leaders, input_var: input_var.into(), input_state, outputs })
    }

    /// Leaderless protocol with input variable `x`.
    pub fn leaderless(
        states: Vec<String>,
        transitions: Vec<Transition>,
        input_state: StateId,
        outputs: Vec<bool>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        Self::new(states, transitions, Configuration::zero(n), "x", input_state, outputs)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition_index(&self, t: &Transition) -> Option<usize> {
        self.transitions.binary_search(t).ok()
    }

    pub fn leaders(&self) -> &Configuration {
        &self.leaders
    }

    pub fn is_leaderless(&self) -> bool {
        self.leaders.is_zero()
    }

    pub fn input_var(&self) -> &str {
        &self.input_var
    }

    pub fn input_state(&self) -> StateId {
        self.input_state
    }

    pub fn output(&self, q: StateId) -> bool {
        self.outputs[q]
    }

    pub fn outputs(&self) -> &[bool] {
        &self.outputs
    }

    /// At most one transition per unordered pair.
    pub fn is_deterministic(&self) -> bool {
        self.transitions.windows(2).all(|w| w[0].pre != w[1].pre)
    }

    /// Every unordered pair has at least one transition.
    pub fn is_complete(&self) -> bool {
        let covered: BTreeSet<Pair> = self.transitions.iter().map(|t| t.pre).collect();
        covered.len() == self.num_states() * (self.num_states() + 1) / 2
    }

    /// `L + i·I(x)` without the `|C| ≥ 2` check; potential steps and scaled
    /// witnesses need inputs 0 and 1 as well.
    pub fn input_config(&self, i: &BigUint) -> Configuration {
        let mut c = self.leaders.clone();
        c.add_to(self.input_state, i);
        c
    }

    /// Renders a configuration with state names, e.g. `⟦2·1, 1·4⟧`.
    pub fn show(&self, c: &Configuration) -> String {
        let parts: Vec<String> = (0..self.num_states())
            .filter(|&q| !c.get(q).is_zero())
            .map(|q| format!("{}·{}", c.get(q), self.states[q]))
            .collect();
        format!("⟦{}⟧", parts.join(", "))
    }

    pub fn show_transition(&self, t: &Transition) -> String {
        format!(
            "{},{} ↦ {},{}",
            self.states[t.pre.0], self.states[t.pre.1], self.states[t.post.0], self.states[t.post.1]
        )
    }

    /// Copy restricted to the states in `keep` (in their original order),
    /// dropping every transition that touches a removed state.
    fn restrict(&self, keep: &[StateId]) -> Result<Protocol, ModelError> {
        let remap: HashMap<StateId, StateId> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let transitions = self
            .transitions
            .iter()
            .filter_map(|t| {
                Some(Transition::new(
                    *remap.get(&t.pre.0)?,
                    *remap.get(&t.pre.1)?,
                    *remap.get(&t.post.0)?,
                    *remap.get(&t.post.1)?,
                ))
            })
            .collect();
        let leaders = Configuration::from_counts(keep.iter().map(|&q| self.leaders.get(q).clone()).collect());
        let input_state = *remap.get(&self.input_state).ok_or_else(|| {
            ModelError::InputStateRemoved(self.states[self.input_state].clone())
        })?;
        Protocol::new(
            keep.iter().map(|&q| self.states[q].clone()).collect(),
            transitions,
            leaders,
            self.input_var.clone(),
            input_state,
            keep.iter().map(|&q| self.outputs[q]).collect(),
        )
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states: {}", self.states.join(" "))?;
        writeln!(f, "input: {} -> {}", self.input_var, self.states[self.input_state])?;
        if !self.is_leaderless() {
            writeln!(f, "leaders: {}", self.show(&self.leaders))?;
        }
        let ones: Vec<&str> =
            (0..self.num_states()).filter(|&q| self.outputs[q]).map(|q| self.states[q].as_str()).collect();
        writeln!(f, "output 1: {{{}}}", ones.join(", "))?;
        for t in &self.transitions {
            if !t.is_identity() {
                writeln!(f, "  {}", self.show_transition(t))?;
            }
        }
        Ok(())
    }
}

/// Result of [`normalize_protocol`].
#[derive(Clone, Debug)]
pub struct Normalized {
    pub protocol: Protocol,
    /// Names of states removed as uncoverable.
    pub removed: Vec<String>,
}

/// Completes missing pairs with identity transitions and optionally strips
/// states that no input can cover.
pub fn normalize_protocol(p: &Protocol, strip_uncoverable: bool) -> Result<Normalized, ModelError> {
    let mut transitions = p.transitions.clone();
    let covered: BTreeSet<Pair> = transitions.iter().map(|t| t.pre).collect();
    transitions.extend(Pair::all(p.num_states()).filter(|pair| !covered.contains(pair)).map(Transition::identity));
    let complete = Protocol { transitions, ..p.clone() };
    let complete = Protocol::new(
        complete.states,
        complete.transitions,
        complete.leaders,
        complete.input_var,
        complete.input_state,
        complete.outputs,
    )?;
    if !strip_uncoverable {
        return Ok(Normalized { protocol: complete, removed: Vec::new() });
    }
    let coverable = super::coverable_states(&complete);
    let keep: Vec<StateId> = (0..complete.num_states()).filter(|q| coverable.states.contains(q)).collect();
    if keep.len() == complete.num_states() {
        return Ok(Normalized { protocol: complete, removed: Vec::new() });
    }
    let removed = (0..complete.num_states())
        .filter(|q| !coverable.states.contains(q))
        .map(|q| complete.states[q].clone())
        .collect();
    // Removing states can only delete whole pairs, so the result stays complete.
    Ok(Normalized { protocol: complete.restrict(&keep)?, removed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pair_is_unordered() {
        assert_eq!(Pair::new(2, 1), Pair::new(1, 2));
        assert_eq!(Pair::all(3).count(), 6);
        assert_eq!(Pair::new(1, 1).multiplicity(1), 2);
    }

    #[test]
    fn rejects_bad_input_state() {
        let err = Protocol::leaderless(names(&["a"]), vec![], 3, vec![false]).unwrap_err();
        assert!(matches!(err, ModelError::Malformed(_)));
    }

    #[test]
    fn normalization_adds_identities_and_is_idempotent() {
        // states 0,1,2 ; 1,1 -> 0,2 and a,2 -> 2,2
        let p = Protocol::leaderless(
            names(&["0", "1", "2"]),
            vec![
                Transition::new(1, 1, 0, 2),
                Transition::new(0, 2, 2, 2),
                Transition::new(1, 2, 2, 2),
                Transition::new(2, 2, 2, 2),
            ],
            1,
            vec![false, false, true],
        )
        .unwrap();
        assert!(!p.is_complete());
        let n = normalize_protocol(&p, false).unwrap().protocol;
        assert!(n.is_complete());
        assert_eq!(n.transitions().len(), 6);
        assert!(n.transitions().contains(&Transition::identity(Pair::new(0, 0))));
        assert!(n.transitions().contains(&Transition::identity(Pair::new(0, 1))));
        assert_eq!(normalize_protocol(&n, false).unwrap().protocol, n);
    }

    #[test]
    fn stripping_removes_isolated_state() {
        let p = Protocol::leaderless(
            names(&["x", "y", "s"]),
            vec![Transition::new(0, 0, 1, 1)],
            0,
            vec![false, true, false],
        )
        .unwrap();
        let n = normalize_protocol(&p, true).unwrap();
        assert_eq!(n.removed, vec!["s".to_string()]);
        assert_eq!(n.protocol.states(), &names(&["x", "y"])[..]);
        assert!(n.protocol.is_complete());
    }
}
