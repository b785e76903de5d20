//! The flock-of-birds protocols and exhaustive enumeration of small protocols.

use thiserror::Error;

use crate::model::{normalize_protocol, ModelError, Pair, Protocol, StateId, Transition};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("enumeration space of {space} raw protocols exceeds the limit {limit}")]
    LimitExceeded { space: u128, limit: u128 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Largest `k` accepted by the flock generators (`2^k + 1` states for the unary one).
pub const MAX_FLOCK_K: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    FlockUnary,
    FlockBinary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub k: u32,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Protocol, GenError> {
        match self.kind {
            GeneratorKind::FlockUnary => flock_unary(self.k),
            GeneratorKind::FlockBinary => flock_binary(self.k),
        }
    }
}

fn check_k(k: u32) -> Result<(), GenError> {
    if k == 0 || k > MAX_FLOCK_K {
        return Err(GenError::InvalidParameter(format!("k must lie in 1..={MAX_FLOCK_K}, got {k}")));
    }
    Ok(())
}

/// Agents hold values `0..=2^k`; two agents pool their values into one of
/// them, and once the pool reaches `2^k` everybody converts to `2^k`.
pub fn flock_unary(k: u32) -> Result<Protocol, GenError> {
    check_k(k)?;
    let top = 1usize << k;
    let states = (0..=top).map(|v| v.to_string()).collect();
    let transitions = Pair::all(top + 1)
        .map(|pair| {
            let (a, b) = (pair.first(), pair.second());
            if a + b < top {
                Transition::new(a, b, 0, a + b)
            } else {
                Transition::new(a, b, top, top)
            }
        })
        .collect();
    let outputs = (0..=top).map(|v| v == top).collect();
    Ok(Protocol::leaderless(states, transitions, 1, outputs)?)
}

/// Agents hold `0` or a power of two up to `2^k`; equal powers merge, and
/// `2^k` converts every agent it meets. Identity transitions complete the
/// remaining pairs.
///
/// The state set `{0, 2^0, …, 2^k}` has `k + 2` elements: `k + 1` value
/// states plus the empty state `0`.
pub fn flock_binary(k: u32) -> Result<Protocol, GenError> {
    check_k(k)?;
    let k = k as usize;
    // index 0 is the value 0, index i + 1 is the value 2^i
    let states = std::iter::once("0".to_string()).chain((0..=k).map(|i| (1u64 << i).to_string())).collect();
    let top = k + 1;
    let mut transitions: Vec<Transition> = (0..k).map(|i| Transition::new(i + 1, i + 1, 0, i + 2)).collect();
    transitions.extend((0..=top).map(|a| Transition::new(a, top, top, top)));
    let outputs = (0..=top).map(|q| q == top).collect();
    let raw = Protocol::leaderless(states, transitions, 1, outputs)?;
    Ok(normalize_protocol(&raw, false)?.protocol)
}

#[derive(Clone, Debug)]
pub struct EnumOptions {
    /// Only protocols with exactly one transition per pair.
    pub deterministic: bool,
    pub max_states: usize,
    /// Upper bound on the raw (pre-symmetry) enumeration space.
    pub max_space: u128,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self { deterministic: true, max_states: 3, max_space: 1 << 32 }
    }
}

/// Raw enumeration space: right-hand-side choices per pair, over all pairs,
/// times output maps. The input state is pinned to state 0.
pub fn raw_space(n: usize, deterministic: bool) -> u128 {
    let pairs = (n * (n + 1) / 2) as u32;
    let per_pair: u128 = if deterministic { pairs as u128 } else { (1u128 << pairs) - 1 };
    per_pair.checked_pow(pairs).and_then(|v| v.checked_mul(1u128 << n)).unwrap_or(u128::MAX)
}

/// All leaderless protocols with exactly `n` states and input state `q0`,
/// one representative per orbit of the state permutations fixing `q0`.
pub fn enumerate_protocols(n: usize, opts: &EnumOptions) -> Result<ProtocolStream, GenError> {
    if n == 0 || n > opts.max_states {
        return Err(GenError::InvalidParameter(format!("n must lie in 1..={}, got {n}", opts.max_states)));
    }
    let space = raw_space(n, opts.deterministic);
    if space > opts.max_space {
        return Err(GenError::LimitExceeded { space, limit: opts.max_space });
    }
    let pairs: Vec<Pair> = Pair::all(n).collect();
    let choices = if opts.deterministic { pairs.len() } else { (1usize << pairs.len()) - 1 };
    Ok(ProtocolStream {
        n,
        deterministic: opts.deterministic,
        permutations: permutations_fixing_zero(n),
        digits: vec![0; pairs.len()],
        choices,
        outputs: 0,
        pairs,
        done: false,
    })
}

fn permutations_fixing_zero(n: usize) -> Vec<Vec<StateId>> {
    fn go(prefix: &mut Vec<StateId>, rest: &mut Vec<StateId>, out: &mut Vec<Vec<StateId>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let q = rest.remove(i);
            prefix.push(q);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, q);
        }
    }
    let mut out = Vec::new();
    go(&mut vec![0], &mut (1..n).collect(), &mut out);
    out
}

/// Lazy stream over canonical protocols, produced by [`enumerate_protocols`].
pub struct ProtocolStream {
    n: usize,
    deterministic: bool,
    permutations: Vec<Vec<StateId>>,
    pairs: Vec<Pair>,
    digits: Vec<usize>,
    choices: usize,
    outputs: u32,
    done: bool,
}

type Encoding = (Vec<Transition>, Vec<bool>);

impl ProtocolStream {
    fn current(&self) -> Encoding {
        let mut transitions = Vec::new();
        for (pair, &d) in self.pairs.iter().zip(&self.digits) {
            if self.deterministic {
                transitions.push(Transition { pre: *pair, post: self.pairs[d] });
            } else {
                let mask = d + 1;
                for (j, post) in self.pairs.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        transitions.push(Transition { pre: *pair, post: *post });
                    }
                }
            }
        }
        transitions.sort();
        let outputs = (0..self.n).map(|q| self.outputs >> q & 1 == 1).collect();
        (transitions, outputs)
    }

    fn advance(&mut self) {
        for d in self.digits.iter_mut() {
            *d += 1;
            if *d < self.choices {
                return;
            }
            *d = 0;
        }
        self.outputs += 1;
        if self.outputs == 1 << self.n {
            self.done = true;
        }
    }

    fn is_canonical(&self, enc: &Encoding) -> bool {
        self.permutations.iter().skip(1).all(|perm| *enc <= permute(enc, perm))
    }
}

fn permute(enc: &Encoding, perm: &[StateId]) -> Encoding {
    let mut transitions: Vec<Transition> = enc
        .0
        .iter()
        .map(|t| Transition::new(perm[t.pre.first()], perm[t.pre.second()], perm[t.post.first()], perm[t.post.second()]))
        .collect();
    transitions.sort();
    let mut outputs = vec![false; enc.1.len()];
    for (q, &b) in enc.1.iter().enumerate() {
        outputs[perm[q]] = b;
    }
    (transitions, outputs)
}

impl Iterator for ProtocolStream {
    type Item = Protocol;

    fn next(&mut self) -> Option<Protocol> {
        while !self.done {
            let enc = self.current();
            self.advance();
            if self.is_canonical(&enc) {
                let states = (0..self.n).map(|q| format!("q{q}")).collect();
                return Some(Protocol::leaderless(states, enc.0, 0, enc.1).expect("generated protocol is well-formed"));
            }
        }
        None
    }
}
