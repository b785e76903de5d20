use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::{decompose_solution, hilbert_basis, DiophError, DiophSystem};
use crate::limits::Limits;
use crate::model::{apply_parikh, multiset_displacement, Configuration, Protocol, StateId, TransitionMultiset};

/// Which formula defines `ξ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum XiFormula {
    /// `2(2|T| + 1)^|Q|`
    #[default]
    General,
    /// `2(|Q| + 2)^|Q|`, valid for deterministic protocols.
    Deterministic,
}

pub fn pottier_constant(p: &Protocol, formula: XiFormula) -> BigUint {
    let n = p.num_states() as u32;
    let base = match formula {
        XiFormula::General => 2 * p.transitions().len() as u64 + 1,
        XiFormula::Deterministic => p.num_states() as u64 + 2,
    };
    BigUint::from(base).pow(n) * 2u32
}

/// Rows are the states other than the input state, columns the transitions;
/// entry `(q, t)` is `Δ(t)(q)`. Solutions are the potentially realisable
/// multisets: those that only consume agents from the input state.
pub fn realisable_system(p: &Protocol) -> DiophSystem {
    let x = p.input_state();
    let rows = (0..p.num_states())
        .filter(|&q| q != x)
        .map(|q| p.transitions().iter().map(|t| t.delta(q)).collect())
        .collect();
    DiophSystem::new(p.transitions().len(), rows).expect("rows have one entry per transition")
}

/// A basis multiset `π` with the least input `i` such that `IC(i) ⇒^π C`;
/// with this choice `C` has no agent left in the input state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealisableElement {
    pub pi: TransitionMultiset,
    pub input: u64,
    pub result: Configuration,
}

#[derive(Clone, Debug)]
pub struct RealisableBasis {
    pub system: DiophSystem,
    pub vectors: Vec<Vec<u64>>,
    pub elements: Vec<RealisableElement>,
    /// `ξ` by the chosen formula.
    pub xi: BigUint,
    /// Smallest value that would satisfy every per-element bound:
    /// `max(2|π|, i, |C|)` over the basis.
    pub working_xi: u64,
}

impl RealisableBasis {
    /// Multiplicities of the basis elements summing to `pi`.
    pub fn decompose(&self, pi: &TransitionMultiset) -> Result<Vec<u64>, DiophError> {
        let m: Vec<u64> = pi
            .counts()
            .iter()
            .map(|c| c.to_u64())
            .collect::<Option<_>>()
            .ok_or_else(|| DiophError::LimitExceeded("multiset counts exceed u64".into()))?;
        decompose_solution(&self.system, &m, &self.vectors)
    }
}

/// Hilbert basis of the realisable system with the input and result of each
/// element, checking `|π| ≤ ξ/2`, `i ≤ ξ` and `|C| ≤ ξ`.
pub fn realisable_basis(p: &Protocol, formula: XiFormula, limits: &Limits) -> Result<RealisableBasis, DiophError> {
    if !p.is_leaderless() {
        return Err(DiophError::NotLeaderless);
    }
    if formula == XiFormula::Deterministic && !p.is_deterministic() {
        return Err(DiophError::PreconditionFailed("the deterministic ξ formula needs a deterministic protocol".into()));
    }
    let system = realisable_system(p);
    let vectors = hilbert_basis(&system, limits)?;
    let x = p.input_state();
    let xi = pottier_constant(p, formula);
    let mut working_xi = 0u64;
    let mut elements = Vec::with_capacity(vectors.len());
    for v in &vectors {
        let pi = TransitionMultiset::from_small(v);
        let dx = multiset_displacement(p, &pi).get(x).clone();
        let input = (-dx).to_u64().ok_or_else(|| {
            DiophError::Internal("a realisable multiset must not add agents to the input state".into())
        })?;
        let result = apply_parikh(p, &p.input_config(&BigUint::from(input)), &pi)?;
        let size = pi.size().to_u64().expect("basis vectors are small");
        let bound = (2 * size).max(input).max(result.size().to_u64().expect("small"));
        working_xi = working_xi.max(bound);
        if BigUint::from(bound) > xi {
            return Err(DiophError::Internal(format!("basis element {v:?} exceeds ξ = {xi}")));
        }
        elements.push(RealisableElement { pi, input, result });
    }
    Ok(RealisableBasis { system, vectors, elements, xi, working_xi })
}

/// A small execution prefix that ends inside `ℕ^S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllEmpty {
    pub input: BigUint,
    pub theta: TransitionMultiset,
    pub result: Configuration,
}

/// Given `IC(i) ⇒^π C` with `C` concentrated in `S`, finds `j` and a small
/// `θ` with `IC(j) ⇒^θ C′` and `C′ ∈ ℕ^S`.
///
/// If the input state is in `S`, the empty multiset works with `j = 1`.
/// Otherwise `π` is split into basis parts; parts with agents outside `S`
/// use at most `ξ_w · C(Q∖S)` input agents together, so as long as
/// `ξ_w · C(Q∖S) + C(x) < i` some part with positive input ends in `ℕ^S`.
/// `ξ_w` is the working bound of `basis`.
pub fn allempty_extract(
    p: &Protocol,
    basis: &RealisableBasis,
    i: &BigUint,
    pi: &TransitionMultiset,
    s: &[StateId],
) -> Result<AllEmpty, DiophError> {
    let x = p.input_state();
    if s.contains(&x) {
        let result = Configuration::unit(p.num_states(), x);
        return Ok(AllEmpty { input: BigUint::from(1u32), theta: TransitionMultiset::empty(pi.counts().len()), result });
    }
    let c = apply_parikh(p, &p.input_config(i), pi)
        .map_err(|_| DiophError::PreconditionFailed("π is not potentially applicable at IC(i)".into()))?;
    let outside = c.count_in((0..p.num_states()).filter(|q| !s.contains(q)));
    let needed = &outside * basis.working_xi + c.get(x);
    if &needed >= i {
        return Err(DiophError::PreconditionFailed(format!(
            "configuration has {outside} agents outside S; concentration needs ξ·{outside} + {} < {i}",
            c.get(x)
        )));
    }
    // Any decomposition of π works; a qualifying part h occurs in one iff π − h is a solution.
    let m: Vec<u64> = pi
        .counts()
        .iter()
        .map(|c| c.to_u64())
        .collect::<Option<_>>()
        .ok_or_else(|| DiophError::LimitExceeded("multiset counts exceed u64".into()))?;
    let outside_s = |cfg: &Configuration| (0..p.num_states()).any(|q| !s.contains(&q) && !cfg.get(q).is_zero());
    let fits = |h: &[u64]| {
        let rest: Option<Vec<u64>> = m.iter().zip(h).map(|(a, b)| a.checked_sub(*b)).collect();
        rest.is_some_and(|r| basis.system.is_solution(&r))
    };
    basis
        .elements
        .iter()
        .zip(&basis.vectors)
        .filter(|(e, v)| e.input > 0 && !outside_s(&e.result) && fits(v))
        .min_by_key(|(e, _)| e.pi.size())
        .map(|(e, _)| AllEmpty { input: BigUint::from(e.input), theta: e.pi.clone(), result: e.result.clone() })
        .ok_or_else(|| DiophError::Internal("no basis part of π ends inside ℕ^S despite concentration".into()))
}
