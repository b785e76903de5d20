use super::ReachError;
use crate::limits::Limits;
use crate::model::{Configuration, Protocol, StateId};

/// Minimal elements of an upward-closed set of configurations.
pub type CoverabilityBasis = Vec<Configuration>;

type Vector = Vec<u64>;

fn leq(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Adds `v` to the antichain unless it is dominated; drops elements `v` dominates.
fn insert_minimal(basis: &mut Vec<Vector>, v: Vector) -> bool {
    if basis.iter().any(|m| leq(m, &v)) {
        return false;
    }
    basis.retain(|m| !leq(&v, m));
    basis.push(v);
    true
}

/// Minimal basis of `Pre*(↑targets)`: everything from which some element of
/// `↑targets` is coverable.
///
/// The minimal predecessor of `m` under `t = P ↦ R` is `P + max(m − R, 0)`.
/// Identity transitions never produce anything new and are skipped.
pub fn backward_coverability(
    p: &Protocol,
    targets: &[Configuration],
    limits: &Limits,
) -> Result<CoverabilityBasis, ReachError> {
    let n = p.num_states();
    let mut basis: Vec<Vector> = Vec::new();
    for t in targets {
        let v = t.to_u64s().ok_or_else(|| ReachError::LimitExceeded("target counts exceed u64".into()))?;
        if v.len() != n {
            return Err(ReachError::InvalidArgument("target dimension differs from the protocol".into()));
        }
        insert_minimal(&mut basis, v);
    }
    let moves: Vec<([StateId; 2], [StateId; 2])> = p
        .transitions()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| ([t.pre.first(), t.pre.second()], [t.post.first(), t.post.second()]))
        .collect();

    let mut work: Vec<Vector> = basis.clone();
    while let Some(m) = work.pop() {
        if !basis.contains(&m) {
            continue; // dominated since it was queued
        }
        if limits.expired() {
            return Err(ReachError::LimitExceeded("deadline passed during backward coverability".into()));
        }
        for (pre, post) in &moves {
            let mut v = m.clone();
            for &q in post {
                v[q] = v[q].saturating_sub(1);
            }
            for &q in pre {
                v[q] += 1;
            }
            if insert_minimal(&mut basis, v.clone()) {
                if basis.len() > limits.max_antichain {
                    return Err(ReachError::LimitExceeded(format!(
                        "coverability antichain exceeds {} elements",
                        limits.max_antichain
                    )));
                }
                work.push(v);
            }
        }
    }
    let mut out: Vec<Configuration> = basis.iter().map(|v| Configuration::from_small(v)).collect();
    out.sort();
    Ok(out)
}

/// Unit configurations of the states whose output is not `b`.
pub fn bad_targets(p: &Protocol, b: bool) -> Vec<Configuration> {
    (0..p.num_states()).filter(|&q| p.output(q) != b).map(|q| Configuration::unit(p.num_states(), q)).collect()
}

/// Minimal configurations that can reach a configuration whose output is not `b`;
/// `𝒮_b` is the complement of their upward closure.
pub fn unstable_basis(p: &Protocol, b: bool, limits: &Limits) -> Result<CoverabilityBasis, ReachError> {
    backward_coverability(p, &bad_targets(p, b), limits)
}

pub fn covers_some(c: &Configuration, basis: &[Configuration]) -> bool {
    basis.iter().any(|m| m.le(c))
}

/// Whether every configuration `e + v` with `v ∈ ℕ^free` avoids `↑basis`,
/// i.e. each minimal element exceeds `e` on some state outside `free`.
pub fn cylinder_avoids(e: &Configuration, free: &[StateId], basis: &[Configuration]) -> bool {
    basis.iter().all(|m| (0..e.dim()).any(|q| !free.contains(&q) && m.get(q) > e.get(q)))
}
