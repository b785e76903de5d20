use std::cell::OnceCell;
use std::collections::VecDeque;

use num_bigint::BigUint;
use rustc_hash::FxHashMap;

use super::ReachError;
use crate::limits::Limits;
use crate::model::{Configuration, Protocol, Transition};

/// Complete (or truncated) reachability graph from a root configuration.
///
/// Transitions preserve the population size, so the graph is finite. Nodes
/// are stored with `u32` counts; node 0 is the root and nodes are numbered in
/// breadth-first order.
#[derive(Clone, Debug)]
pub struct ReachGraph {
    nodes: Vec<Box<[u32]>>,
    index: FxHashMap<Box<[u32]>, u32>,
    /// `(transition index, target)` for every enabled transition, identities included.
    edges: Vec<Vec<(u32, u32)>>,
    /// BFS tree: `(parent, transition)`; the root points to itself.
    parent: Vec<(u32, u32)>,
    truncated: bool,
    reverse: OnceCell<Vec<Vec<u32>>>,
}

const ROOT: u32 = 0;

/// Fires `t` from `c` into `next`; false if `t` is disabled.
fn fire_into(c: &[u32], t: &Transition, next: &mut [u32]) -> bool {
    let (p, q) = (t.pre.first(), t.pre.second());
    let enabled = if p == q { c[p] >= 2 } else { c[p] >= 1 && c[q] >= 1 };
    if !enabled {
        return false;
    }
    next.copy_from_slice(c);
    next[p] -= 1;
    next[q] -= 1;
    next[t.post.first()] += 1;
    next[t.post.second()] += 1;
    true
}

impl ReachGraph {
    /// Breadth-first exploration; stops adding nodes once `limits.max_nodes`
    /// is reached or the deadline passes, and marks the graph truncated.
    pub fn explore(p: &Protocol, root: &Configuration, limits: &Limits) -> Result<ReachGraph, ReachError> {
        let start = root
            .to_small()
            .ok_or_else(|| ReachError::LimitExceeded("configuration too large for exhaustive exploration".into()))?;
        let mut g = ReachGraph {
            nodes: vec![start.clone()],
            index: FxHashMap::from_iter([(start, ROOT)]),
            edges: vec![Vec::new()],
            parent: vec![(ROOT, 0)],
            truncated: false,
            reverse: OnceCell::new(),
        };
        let mut next = vec![0u32; p.num_states()];
        let mut queue = VecDeque::from([ROOT]);
        while let Some(u) = queue.pop_front() {
            if u % 4096 == 0 && limits.expired() {
                g.truncated = true;
                break;
            }
            for (ti, t) in p.transitions().iter().enumerate() {
                if !fire_into(&g.nodes[u as usize], t, &mut next) {
                    continue;
                }
                let v = match g.index.get(next.as_slice()) {
                    Some(&v) => v,
                    None => {
                        if g.nodes.len() >= limits.max_nodes {
                            g.truncated = true;
                            continue;
                        }
                        let v = g.nodes.len() as u32;
                        let node: Box<[u32]> = next.as_slice().into();
                        g.index.insert(node.clone(), v);
                        g.nodes.push(node);
                        g.edges.push(Vec::new());
                        g.parent.push((u, ti as u32));
                        queue.push_back(v);
                        v
                    }
                };
                g.edges[u as usize].push((ti as u32, v));
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn root(&self) -> Configuration {
        self.node(0)
    }

    pub fn node(&self, i: usize) -> Configuration {
        Configuration::from_u32(&self.nodes[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.nodes.iter().map(|c| Configuration::from_u32(c))
    }

    pub fn find(&self, c: &Configuration) -> Option<usize> {
        let small = c.to_small()?;
        self.index.get(&small).map(|&i| i as usize)
    }

    /// Labelled successors of node `i`.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges[i].iter().map(|&(t, v)| (t as usize, v as usize))
    }

    /// Output of node `i`: `Some(b)` when all populated states output `b`.
    pub fn output(&self, p: &Protocol, i: usize) -> Option<bool> {
        let mut seen = None;
        for (q, &c) in self.nodes[i].iter().enumerate() {
            if c == 0 {
                continue;
            }
            match seen {
                None => seen = Some(p.output(q)),
                Some(b) if b != p.output(q) => return None,
                _ => {}
            }
        }
        seen
    }

    /// Nodes from which some node in `seeds` is reachable.
    pub fn can_reach(&self, seeds: &[bool]) -> Vec<bool> {
        let reverse = self.reverse.get_or_init(|| {
            let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); self.len()];
            for (u, out) in self.edges.iter().enumerate() {
                for &(_, v) in out {
                    reverse[v as usize].push(u as u32);
                }
            }
            reverse
        });
        let mut mark = seeds.to_vec();
        let mut queue: VecDeque<usize> = (0..self.len()).filter(|&i| seeds[i]).collect();
        while let Some(v) = queue.pop_front() {
            for &u in &reverse[v] {
                if !mark[u as usize] {
                    mark[u as usize] = true;
                    queue.push_back(u as usize);
                }
            }
        }
        mark
    }

    /// `b`-stable nodes: no reachable node has an output other than `b`.
    pub fn stable_mask(&self, p: &Protocol, b: bool) -> Vec<bool> {
        let bad: Vec<bool> = (0..self.len()).map(|i| self.output(p, i) != Some(b)).collect();
        self.can_reach(&bad).into_iter().map(|r| !r).collect()
    }

    /// Transition sequence along the BFS tree from the root to node `i`.
    pub fn path_to(&self, p: &Protocol, mut i: usize) -> Vec<Transition> {
        let mut path = Vec::new();
        while i != ROOT as usize {
            let (parent, t) = self.parent[i];
            path.push(p.transitions()[t as usize]);
            i = parent as usize;
        }
        path.reverse();
        path
    }

    fn require_complete(&self) -> Result<(), ReachError> {
        if self.truncated {
            return Err(ReachError::LimitExceeded(format!("reachability graph truncated at {} nodes", self.len())));
        }
        Ok(())
    }
}

/// Complete reachability graph from `c`.
pub fn reachable_configs(p: &Protocol, c: &Configuration, limits: &Limits) -> Result<ReachGraph, ReachError> {
    let g = ReachGraph::explore(p, c, limits)?;
    g.require_complete()?;
    Ok(g)
}

/// Whether `c` is `b`-stable, decided on the fixed-size reachability graph.
pub fn is_stable(p: &Protocol, c: &Configuration, b: bool, limits: &Limits) -> Result<bool, ReachError> {
    let g = reachable_configs(p, c, limits)?;
    Ok((0..g.len()).all(|i| g.output(p, i) == Some(b)))
}

/// Behaviour of a protocol on one input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputValue {
    /// Every reachable configuration can reach the `b`-stable set.
    Decided(bool),
    /// Some reachable configuration cannot reach `𝒮_1` and some cannot
    /// reach `𝒮_0`; the protocol computes no predicate.
    Undefined { no_path_to_one: Configuration, no_path_to_zero: Configuration },
}

/// Decides the value the protocol assigns to input `i` (if any).
pub fn evaluate_input(p: &Protocol, i: u64, limits: &Limits) -> Result<InputValue, ReachError> {
    let root = p.input_config(&BigUint::from(i));
    let g = reachable_configs(p, &root, limits)?;
    let reach_one = g.can_reach(&g.stable_mask(p, true));
    let reach_zero = g.can_reach(&g.stable_mask(p, false));
    if reach_one.iter().all(|&r| r) {
        return Ok(InputValue::Decided(true));
    }
    if reach_zero.iter().all(|&r| r) {
        return Ok(InputValue::Decided(false));
    }
    let first = |mask: &[bool]| g.node(mask.iter().position(|&r| !r).expect("some node fails"));
    Ok(InputValue::Undefined { no_path_to_one: first(&reach_one), no_path_to_zero: first(&reach_zero) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub input: u64,
    /// A configuration reachable from the initial one ...
    pub configuration: Configuration,
    /// ... that cannot reach the stable set of this output.
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Counterexample),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Checks that `p` computes `x ≥ η` on every input in `[2, max_input]`.
pub fn verify_threshold(p: &Protocol, eta: u64, max_input: u64, limits: &Limits) -> Result<Verdict, ReachError> {
    if eta < 2 || max_input < 2 {
        return Err(ReachError::InvalidArgument(format!(
            "threshold and input range start at 2 (got η = {eta}, max input = {max_input})"
        )));
    }
    for i in 2..=max_input {
        if limits.expired() {
            return Err(ReachError::LimitExceeded(format!("deadline passed before input {i}")));
        }
        let expected = i >= eta;
        let root = p.input_config(&BigUint::from(i));
        let g = reachable_configs(p, &root, limits)?;
        let ok = g.can_reach(&g.stable_mask(p, expected));
        if let Some(bad) = ok.iter().position(|&r| !r) {
            return Ok(Verdict::Reject(Counterexample { input: i, configuration: g.node(bad), expected }));
        }
    }
    Ok(Verdict::Accept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{flock_binary, flock_unary};

    fn set(g: &ReachGraph) -> Vec<Configuration> {
        let mut v: Vec<Configuration> = g.nodes().collect();
        v.sort();
        v
    }

    #[test]
    fn reach_examples() {
        let lim = Limits::default();
        let p2 = flock_binary(2).unwrap();
        let g = reachable_configs(&p2, &Configuration::from_small(&[0, 3, 0, 0]), &lim).unwrap();
        let mut want = vec![Configuration::from_small(&[0, 3, 0, 0]), Configuration::from_small(&[1, 1, 1, 0])];
        want.sort();
        assert_eq!(set(&g), want);
        // identity self-loops are kept as edges
        let mixed = g.find(&Configuration::from_small(&[1, 1, 1, 0])).unwrap();
        assert!(g.successors(mixed).any(|(_, v)| v == mixed));

        let p1 = flock_binary(1).unwrap();
        let g = reachable_configs(&p1, &Configuration::from_small(&[0, 2, 0]), &lim).unwrap();
        let mut want = vec![
            Configuration::from_small(&[0, 2, 0]),
            Configuration::from_small(&[1, 0, 1]),
            Configuration::from_small(&[0, 0, 2]),
        ];
        want.sort();
        assert_eq!(set(&g), want);
    }

    #[test]
    fn identity_only_protocol_has_singleton_graph() {
        let states = vec!["a".to_string(), "b".to_string()];
        let p = Protocol::leaderless(states, vec![], 0, vec![false, true]).unwrap();
        let p = crate::model::normalize_protocol(&p, false).unwrap().protocol;
        let c = Configuration::from_small(&[2, 3]);
        assert_eq!(reachable_configs(&p, &c, &Limits::default()).unwrap().len(), 1);
    }

    #[test]
    fn truncation_is_an_error() {
        let p = flock_unary(2).unwrap();
        let lim = Limits { max_nodes: 3, ..Limits::default() };
        let c = p.input_config(&BigUint::from(6u32));
        assert!(matches!(reachable_configs(&p, &c, &lim), Err(ReachError::LimitExceeded(_))));
        assert!(ReachGraph::explore(&p, &c, &lim).unwrap().is_truncated());
    }

    #[test]
    fn stability_examples() {
        let lim = Limits::default();
        let p1 = flock_binary(1).unwrap();
        assert!(is_stable(&p1, &Configuration::from_small(&[0, 0, 3]), true, &lim).unwrap());
        assert!(is_stable(&p1, &Configuration::from_small(&[1, 1, 0]), false, &lim).unwrap());
        assert!(!is_stable(&p1, &Configuration::from_small(&[0, 2, 0]), false, &lim).unwrap());
    }

    #[test]
    fn path_reconstruction_replays() {
        let p = flock_unary(2).unwrap();
        let root = p.input_config(&BigUint::from(5u32));
        let g = reachable_configs(&p, &root, &Limits::default()).unwrap();
        for i in 0..g.len() {
            let w = crate::model::ExecutionWitness::Steps(g.path_to(&p, i));
            assert_eq!(crate::model::replay(&p, &root, &w).unwrap(), g.node(i));
        }
    }

    #[test]
    fn verify_examples() {
        let lim = Limits::default();
        let p2 = flock_binary(2).unwrap();
        assert_eq!(verify_threshold(&p2, 4, 10, &lim).unwrap(), Verdict::Accept);
        match verify_threshold(&p2, 5, 10, &lim).unwrap() {
            Verdict::Reject(cex) => {
                assert_eq!(cex.input, 4);
                assert!(!cex.expected);
            }
            Verdict::Accept => panic!("x ≥ 5 must be rejected"),
        }
        let states = vec!["q".to_string()];
        let one = Protocol::leaderless(states, vec![Transition::new(0, 0, 0, 0)], 0, vec![true]).unwrap();
        assert!(verify_threshold(&one, 2, 10, &lim).unwrap().is_accept());
        assert!(verify_threshold(&one, 1, 10, &lim).is_err());
    }

    #[test]
    fn input_values_of_flock() {
        let p1 = flock_binary(1).unwrap();
        let lim = Limits::default();
        for i in 2..8 {
            assert_eq!(evaluate_input(&p1, i, &lim).unwrap(), InputValue::Decided(true));
        }
    }

    #[test]
    fn undefined_input_detected() {
        // x,x -> y,y and x,x -> z,z ; y outputs 1, z outputs 0, y,z frozen
        let states = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let p = Protocol::leaderless(
            states,
            vec![Transition::new(0, 0, 1, 1), Transition::new(0, 0, 2, 2)],
            0,
            vec![false, true, false],
        )
        .unwrap();
        let p = crate::model::normalize_protocol(&p, false).unwrap().protocol;
        assert!(matches!(evaluate_input(&p, 2, &Limits::default()).unwrap(), InputValue::Undefined { .. }));
    }
}
