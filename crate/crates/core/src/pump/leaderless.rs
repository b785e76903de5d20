use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::certificate::{Certificate, Variant, D_TO_E, INITIAL_TO_D};
use super::saturation::{saturation_sequence, Saturation};
use super::PumpError;
use crate::dioph::{allempty_extract, realisable_basis, DiophError, XiFormula};
use crate::limits::Limits;
use crate::model::{parikh, Configuration, ExecutionWitness, Protocol, StateId, TransitionMultiset};
use crate::reach::{ideal_member, stable_set_ideals, Ideal, Polarity, ReachGraph};

/// Agents of `c` outside `free`.
fn outside(c: &Configuration, free: &[StateId]) -> BigUint {
    c.count_in((0..c.dim()).filter(|q| free.binary_search(q).is_err()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Concentrated {
    pub ideal: Ideal,
    pub e: Configuration,
    /// Extends the witness to `D` by the path from `D` to `E`.
    pub witness: ExecutionWitness,
}

fn explore_complete(p: &Protocol, d: &Configuration, limits: &Limits) -> Result<ReachGraph, PumpError> {
    let g = ReachGraph::explore(p, d, limits)?;
    if g.is_truncated() {
        return Err(PumpError::NoStableReached(format!("exploration from {} stopped at {} configurations", p.show(d), g.len())));
    }
    Ok(g)
}

/// A stable `E` reachable from `D` inside an ideal `(B, S)` of `𝒮` with
/// `k · E(Q∖S) ≤ |E|`, i.e. `E` is `1/k`-concentrated in `S`.
pub fn concentrate(
    p: &Protocol,
    k: &BigUint,
    d: &Configuration,
    witness_to_d: ExecutionWitness,
    limits: &Limits,
) -> Result<Concentrated, PumpError> {
    if k.is_zero() {
        return Err(PumpError::PreconditionFailed("k must be positive".into()));
    }
    let decomposition = stable_set_ideals(p, Polarity::S, limits)?;
    let g = explore_complete(p, d, limits)?;
    let (zero, one) = (g.stable_mask(p, false), g.stable_mask(p, true));
    for i in (0..g.len()).filter(|&i| zero[i] || one[i]) {
        let e = g.node(i);
        for ideal in decomposition.ideals.iter().filter(|ideal| ideal_member(&e, ideal)) {
            if k * outside(&e, &ideal.free) <= e.size() {
                let witness = ExecutionWitness::Concat(vec![witness_to_d, ExecutionWitness::Steps(g.path_to(p, i))]);
                return Ok(Concentrated { ideal: ideal.clone(), e, witness });
            }
        }
    }
    Err(PumpError::NoStableReached(format!("no stable configuration from {} is 1/{k}-concentrated", p.show(d))))
}

#[derive(Clone, Debug, Default)]
pub struct LeaderlessOptions {
    pub formula: XiFormula,
    /// Largest scale `m` to try (`D = m·C`); defaults to `Limits::max_scale`.
    pub max_scale: Option<u64>,
    /// Give up once `a` would exceed this.
    pub max_a: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct LeaderlessBuild {
    pub certificate: Certificate,
    pub saturation: Saturation,
    /// The `m` with `D = m·C`.
    pub scale: u64,
    /// `max(2|π|, i, |C|)` over the realisable basis.
    pub working_xi: u64,
    /// Largest bound norm `β′` of the computed `𝒮` decomposition.
    pub working_norm: BigUint,
    /// A scale at which success is guaranteed:
    /// `max(ξ_w, ⌊(ξ_w + 1)·β′ / 3^j⌋ + 1)`.
    pub guaranteed_scale: BigUint,
}

/// Builds a leaderless pumping certificate.
///
/// `IC(3^j) →σ C` saturates every state, so `IC(m·3^j) →* D = m·C` is
/// `m`-saturated. From `D` a stable `E` is reached inside an ideal `(B, S)`
/// of `𝒮`; splitting the Parikh image of the whole execution into realisable
/// basis parts yields `IC(b) ⇒^θ D_b ∈ ℕ^S`. The first `m` for which
/// `2|θ| ≤ m` gives the certificate with `a = m·3^j`. Once
/// `m ≥ guaranteed_scale` every stable `E` works, since its agents outside
/// `S` are bounded by `β′`.
pub fn build_leaderless_certificate(
    p: &Protocol,
    opts: &LeaderlessOptions,
    limits: &Limits,
) -> Result<LeaderlessBuild, PumpError> {
    if !p.is_leaderless() {
        return Err(PumpError::NotLeaderless);
    }
    let saturation = saturation_sequence(p)?;
    let basis = realisable_basis(p, opts.formula, limits)?;
    let decomposition = stable_set_ideals(p, Polarity::S, limits)?;
    let working_norm = decomposition.norm();
    let round = BigUint::from(3u32).pow(saturation.j);
    let xi_w = BigUint::from(basis.working_xi);
    let guaranteed_scale = xi_w.clone().max((&xi_w + 1u32) * &working_norm / &round + 1u32);
    let max_scale = opts.max_scale.unwrap_or(limits.max_scale);
    let cap = guaranteed_scale.to_u64().map_or(max_scale, |g| g.min(max_scale));

    let sigma_parikh = parikh(p, &saturation.sigma)?;
    let round_config = p.input_config(&round);
    for m in 1..=cap {
        if limits.expired() {
            return Err(PumpError::LimitExceeded("deadline passed while building the certificate".into()));
        }
        let scale = BigUint::from(m);
        let a = &round * m;
        if a < BigUint::from(2u32) {
            continue;
        }
        if opts.max_a.is_some_and(|max| a > BigUint::from(max)) {
            break;
        }
        let d = saturation.result.scale(&scale);
        let g = explore_complete(p, &d, limits)?;
        let (zero, one) = (g.stable_mask(p, false), g.stable_mask(p, true));
        for i in (0..g.len()).filter(|&i| zero[i] || one[i]) {
            let e = g.node(i);
            let path = g.path_to(p, i);
            let mut pi_total = TransitionMultiset::empty(p.transitions().len());
            pi_total.add_scaled(&sigma_parikh, &scale);
            pi_total.add_scaled(&parikh(p, &path)?, &BigUint::one());
            for ideal in decomposition.ideals.iter().filter(|ideal| ideal_member(&e, ideal)) {
                let extracted = match allempty_extract(p, &basis, &a, &pi_total, &ideal.free) {
                    Ok(x) => x,
                    Err(DiophError::PreconditionFailed(_)) => continue,
                    Err(other) => return Err(other.into()),
                };
                if extracted.theta.size() * 2u32 > scale {
                    continue;
                }
                let to_d = ExecutionWitness::Repeat {
                    body: Box::new(ExecutionWitness::Steps(saturation.sigma.clone())),
                    count: scale.clone(),
                    base: Configuration::zero(p.num_states()),
                    consume: round_config.clone(),
                    produce: saturation.result.clone(),
                };
                let witnesses = BTreeMap::from([
                    (INITIAL_TO_D.to_string(), to_d),
                    (D_TO_E.to_string(), ExecutionWitness::Steps(path)),
                ]);
                let certificate = Certificate {
                    variant: Variant::Leaderless,
                    a,
                    b: extracted.input,
                    free: ideal.free.clone(),
                    e,
                    d_b: extracted.result,
                    witnesses,
                    d: Some(d),
                    pi: Some(extracted.theta),
                };
                return Ok(LeaderlessBuild {
                    certificate,
                    saturation,
                    scale: m,
                    working_xi: basis.working_xi,
                    working_norm,
                    guaranteed_scale,
                });
            }
        }
        if scale >= guaranteed_scale {
            return Err(PumpError::InvariantViolated(format!(
                "no certificate at scale {m} although the guaranteed scale is {guaranteed_scale}"
            )));
        }
    }
    Err(PumpError::LimitExceeded(format!(
        "no certificate up to scale {cap} (guaranteed at {guaranteed_scale})"
    )))
}
