use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::coverability::unstable_basis;
use super::ReachError;
use crate::limits::Limits;
use crate::model::format::{config_from_map, config_to_map, ConfigMap};
use crate::model::{Configuration, ModelError, Protocol, StateId};
use crate::pow2::{cmp_pow2, factorial, ScaledPow2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdealForm {
    /// `{B + v : v ∈ ℕ^S}`
    Paper,
    /// `{C : C(q) ≤ B(q) for all q ∉ S}`
    Down,
}

/// A cylinder `(B, S)` in one of the two readings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ideal {
    pub form: IdealForm,
    pub bound: Configuration,
    /// Sorted free states.
    pub free: Vec<StateId>,
}

impl Ideal {
    /// Canonical form: free coordinates carry no bound.
    pub fn new(form: IdealForm, mut bound: Configuration, mut free: Vec<StateId>) -> Ideal {
        free.sort_unstable();
        free.dedup();
        for &q in &free {
            bound.set(q, BigUint::zero());
        }
        Ideal { form, bound, free }
    }

    pub fn is_free(&self, q: StateId) -> bool {
        self.free.binary_search(&q).is_ok()
    }

    /// `‖B‖`, the number of agents in the bound.
    pub fn norm(&self) -> BigUint {
        self.bound.size()
    }

    /// Whether `other ⊆ self`, both read as down-cylinders.
    fn contains_down(&self, other: &Ideal) -> bool {
        (0..self.bound.dim()).all(|q| self.is_free(q) || (!other.is_free(q) && other.bound.get(q) <= self.bound.get(q)))
    }
}

pub fn ideal_member(c: &Configuration, ideal: &Ideal) -> bool {
    match ideal.form {
        IdealForm::Down => (0..c.dim()).all(|q| ideal.is_free(q) || c.get(q) <= ideal.bound.get(q)),
        IdealForm::Paper => {
            (0..c.dim()).all(|q| if ideal.is_free(q) { c.get(q) >= ideal.bound.get(q) } else { c.get(q) == ideal.bound.get(q) })
        }
    }
}

/// Which stable set a decomposition represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    S0,
    S1,
    S,
}

impl Polarity {
    pub fn outputs(self) -> &'static [bool] {
        match self {
            Polarity::S0 => &[false],
            Polarity::S1 => &[true],
            Polarity::S => &[false, true],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealDecomposition {
    pub polarity: Polarity,
    pub ideals: Vec<Ideal>,
}

impl IdealDecomposition {
    pub fn contains(&self, c: &Configuration) -> bool {
        self.ideals.iter().any(|i| ideal_member(c, i))
    }

    /// Largest bound norm among the ideals.
    pub fn norm(&self) -> BigUint {
        self.ideals.iter().map(Ideal::norm).max().unwrap_or_default()
    }
}

/// A down-cylinder under construction: `None` marks a free coordinate.
type Cylinder = Vec<Option<u64>>;

fn cylinder_le(a: &Cylinder, b: &Cylinder) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    })
}

/// Only configurations of size at least 2 matter; a cylinder without free
/// states and with total bound below 2 holds none of them.
fn is_degenerate(c: &Cylinder) -> bool {
    c.iter().all(Option::is_some) && c.iter().map(|v| v.unwrap()).sum::<u64>() < 2
}

/// Complement of `↑basis` as a union of down-cylinders: each minimal `m`
/// forces some coordinate with `m(q) > 0` below `m(q)`; intersecting those
/// choices over all `m` and dropping subsumed cylinders gives the union.
pub fn complement_of_upward(
    states: usize,
    basis: &[Configuration],
    limits: &Limits,
) -> Result<Vec<Ideal>, ReachError> {
    let mut parts: Vec<Cylinder> = vec![vec![None; states]];
    for m in basis {
        let m = m.to_u64s().ok_or_else(|| ReachError::LimitExceeded("basis counts exceed u64".into()))?;
        let mut next: Vec<Cylinder> = Vec::new();
        for cyl in &parts {
            for (q, &mq) in m.iter().enumerate() {
                if mq == 0 {
                    continue;
                }
                let mut c = cyl.clone();
                c[q] = Some(c[q].map_or(mq - 1, |b| b.min(mq - 1)));
                if is_degenerate(&c) || next.iter().any(|d| cylinder_le(&c, d)) {
                    continue;
                }
                next.retain(|d| !cylinder_le(d, &c));
                next.push(c);
            }
        }
        if next.len() > limits.max_antichain {
            return Err(ReachError::LimitExceeded(format!("more than {} ideals", limits.max_antichain)));
        }
        parts = next;
    }
    let mut ideals: Vec<Ideal> = parts
        .into_iter()
        .map(|c| {
            let free = (0..states).filter(|&q| c[q].is_none()).collect();
            let bound = Configuration::from_small(&c.iter().map(|v| v.unwrap_or(0)).collect::<Vec<_>>());
            Ideal::new(IdealForm::Down, bound, free)
        })
        .collect();
    ideals.sort();
    Ok(ideals)
}

fn minimize(mut ideals: Vec<Ideal>) -> Vec<Ideal> {
    ideals.sort();
    ideals.dedup();
    let keep: Vec<bool> = (0..ideals.len())
        .map(|i| {
            !(0..ideals.len()).any(|j| {
                j != i && ideals[j].contains_down(&ideals[i]) && (!ideals[i].contains_down(&ideals[j]) || j < i)
            })
        })
        .collect();
    ideals.into_iter().zip(keep).filter_map(|(i, k)| k.then_some(i)).collect()
}

/// `β = 2^(2(2n+1)!+1)`: the bound on basis norms.
pub fn small_basis_norm_bound(n: usize) -> ScaledPow2 {
    ScaledPow2::pow2(factorial(2 * n as u64 + 1) * 2u32 + 1u32)
}

/// `ϑ(n) = 2^((2n+2)!)`: the small basis constant.
pub fn small_basis_constant(n: usize) -> ScaledPow2 {
    ScaledPow2::pow2(factorial(2 * n as u64 + 2))
}

/// Finite decomposition of `𝒮_0`, `𝒮_1` or `𝒮` into down-cylinders.
///
/// `𝒮_b` is the complement of the configurations that can cover a state with
/// output `≠ b`. The result's norm and size are checked against `β` and `ϑ(n)`.
pub fn stable_set_ideals(p: &Protocol, which: Polarity, limits: &Limits) -> Result<IdealDecomposition, ReachError> {
    let mut ideals = Vec::new();
    for &b in which.outputs() {
        let basis = unstable_basis(p, b, limits)?;
        ideals.extend(complement_of_upward(p.num_states(), &basis, limits)?);
    }
    let dec = IdealDecomposition { polarity: which, ideals: minimize(ideals) };
    let n = p.num_states();
    let norm_ok = cmp_pow2(&dec.norm(), &small_basis_norm_bound(n).exponent) != Ordering::Greater;
    let count_ok = cmp_pow2(&BigUint::from(dec.ideals.len()), &small_basis_constant(n).exponent) != Ordering::Greater;
    if !norm_ok || !count_ok {
        return Err(ReachError::InvariantViolated(format!(
            "decomposition with norm {} and {} ideals exceeds the small-basis bounds",
            dec.norm(),
            dec.ideals.len()
        )));
    }
    Ok(dec)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdealFile {
    pub form: IdealForm,
    pub bound: ConfigMap,
    pub free: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub polarity: Polarity,
    pub ideals: Vec<IdealFile>,
}

pub fn ideal_to_file(p: &Protocol, i: &Ideal) -> IdealFile {
    IdealFile {
        form: i.form,
        bound: config_to_map(p, &i.bound),
        free: i.free.iter().map(|&q| p.state_name(q).to_string()).collect(),
    }
}

pub fn ideal_from_file(p: &Protocol, f: &IdealFile) -> Result<Ideal, ModelError> {
    let free = f
        .free
        .iter()
        .map(|s| p.state_id(s).ok_or_else(|| ModelError::Format(format!("unknown state `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ideal::new(f.form, config_from_map(p, &f.bound)?, free))
}

pub fn decomposition_to_file(p: &Protocol, d: &IdealDecomposition) -> DecompositionFile {
    DecompositionFile { polarity: d.polarity, ideals: d.ideals.iter().map(|i| ideal_to_file(p, i)).collect() }
}

pub fn decomposition_from_file(p: &Protocol, f: &DecompositionFile) -> Result<IdealDecomposition, ModelError> {
    Ok(IdealDecomposition {
        polarity: f.polarity,
        ideals: f.ideals.iter().map(|i| ideal_from_file(p, i)).collect::<Result<_, _>>()?,
    })
}

/// Sorted-key summary used by text output.
pub fn describe(p: &Protocol, i: &Ideal) -> String {
    let bound: BTreeMap<&str, String> =
        (0..p.num_states()).filter(|&q| !i.is_free(q)).map(|q| (p.state_name(q), i.bound.get(q).to_string())).collect();
    let free: Vec<&str> = i.free.iter().map(|&q| p.state_name(q)).collect();
    let form = match i.form {
        IdealForm::Down => "down",
        IdealForm::Paper => "paper",
    };
    format!("{form} free={{{}}} bound={bound:?}", free.join(","))
}
