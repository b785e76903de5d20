use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::certificate::{Certificate, Variant, INITIAL_TO_E, PUMP};
use super::PumpError;
use crate::limits::Limits;
use crate::model::{Configuration, ExecutionWitness, Protocol, Transition};
use crate::reach::{ideal_member, stable_set_ideals, Polarity, ReachGraph};

/// Breadth-first search from `start` for the first configuration in `𝒮`
/// (stable at this size), with the path to it.
pub(crate) fn first_stable(
    p: &Protocol,
    start: &Configuration,
    limits: &Limits,
) -> Result<(Configuration, Vec<Transition>), PumpError> {
    let g = ReachGraph::explore(p, start, limits)?;
    if g.is_truncated() {
        return Err(PumpError::NoStableReached(format!(
            "exploration from {} stopped at {} configurations",
            p.show(start),
            g.len()
        )));
    }
    let zero = g.stable_mask(p, false);
    let one = g.stable_mask(p, true);
    let i = (0..g.len())
        .find(|&i| zero[i] || one[i])
        .ok_or_else(|| PumpError::NoStableReached(format!("no stable configuration reachable from {}", p.show(start))))?;
    Ok((g.node(i), g.path_to(p, i)))
}

/// `C_i` with the execution that produced it: from `IC(2)` for the first
/// link, from `C_{i−1} + x` afterwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub i: u64,
    pub config: Configuration,
    pub steps: Vec<Transition>,
}

/// Stable configurations `C_2, …, C_iMax` with `IC(2) →* C_2` and
/// `C_i + x →* C_{i+1}`; each `C_{i+1}` is the first stable configuration
/// found from `C_i + x`.
pub fn stabilization_chain(p: &Protocol, i_max: u64, limits: &Limits) -> Result<Vec<ChainLink>, PumpError> {
    let mut chain: Vec<ChainLink> = Vec::new();
    if i_max < 2 {
        return Ok(chain);
    }
    let x = Configuration::unit(p.num_states(), p.input_state());
    let mut start = p.input_config(&BigUint::from(2u32));
    for i in 2..=i_max {
        let (config, steps) = first_stable(p, &start, limits)?;
        start = &config + &x;
        chain.push(ChainLink { i, config, steps });
    }
    Ok(chain)
}

/// Replays from `IC(k)` to `C_k` (`start = 2`) or from `C_k + (ℓ−k)·x` to
/// `C_ℓ`, by monotonicity of the chain steps.
fn chain_witness(chain: &[ChainLink]) -> ExecutionWitness {
    ExecutionWitness::Concat(chain.iter().map(|l| ExecutionWitness::Steps(l.steps.clone())).collect())
}

/// Searches the stabilization chain for `k < ℓ` with `C_k ≤ C_ℓ` in a common
/// ideal `(B, S)` of `𝒮` and `C_ℓ − C_k ∈ ℕ^S`, which bounds the threshold
/// by `k`. Returns the first such pair by increasing `k`, then `ℓ`.
pub fn pump_search_leaders(p: &Protocol, i_max: u64, limits: &Limits) -> Result<Option<Certificate>, PumpError> {
    if i_max <= 2 {
        return Ok(None);
    }
    let chain = stabilization_chain(p, i_max, limits)?;
    let decomposition = stable_set_ideals(p, Polarity::S, limits)?;
    for (ki, ck) in chain.iter().enumerate() {
        for (li, cl) in chain.iter().enumerate().skip(ki + 1) {
            let Some(diff) = cl.config.checked_sub(&ck.config) else { continue };
            let ideal = decomposition.ideals.iter().find(|ideal| {
                ideal_member(&ck.config, ideal)
                    && ideal_member(&cl.config, ideal)
                    && diff.support().iter().all(|&q| ideal.is_free(q))
            });
            let Some(ideal) = ideal else { continue };
            let witnesses = BTreeMap::from([
                (INITIAL_TO_E.to_string(), chain_witness(&chain[..=ki])),
                (PUMP.to_string(), chain_witness(&chain[ki + 1..=li])),
            ]);
            return Ok(Some(Certificate {
                variant: Variant::WithLeaders,
                a: BigUint::from(ck.i),
                b: BigUint::from(cl.i - ck.i),
                free: ideal.free.clone(),
                e: ck.config.clone(),
                d_b: diff,
                witnesses,
                d: None,
                pi: None,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::flock_binary;
    use crate::model::replay;
    use crate::pump::check_certificate;
    use crate::reach::is_stable;

    #[test]
    fn chain_of_flock_one() {
        let p = flock_binary(1).unwrap();
        let lim = Limits::default();
        let chain = stabilization_chain(&p, 4, &lim).unwrap();
        assert_eq!(chain[0].config, Configuration::from_small(&[0, 0, 2]));
        let x = Configuration::unit(3, 1);
        for w in chain.windows(2) {
            let end = replay(&p, &(&w[0].config + &x), &ExecutionWitness::Steps(w[1].steps.clone())).unwrap();
            assert_eq!(end, w[1].config);
        }
        for link in &chain {
            let b = link.config.get(2) > &BigUint::from(0u32);
            assert!(is_stable(&p, &link.config, b, &lim).unwrap());
        }
    }

    #[test]
    fn leader_search_on_flocks() {
        let lim = Limits::default();
        let p1 = flock_binary(1).unwrap();
        let cert = pump_search_leaders(&p1, 6, &lim).unwrap().unwrap();
        assert!(cert.a >= BigUint::from(2u32));
        assert!(check_certificate(&p1, &cert, &lim).unwrap().is_accepted());

        let p2 = flock_binary(2).unwrap();
        let cert = pump_search_leaders(&p2, 10, &lim).unwrap().unwrap();
        assert!(cert.a >= BigUint::from(4u32));
        assert!(check_certificate(&p2, &cert, &lim).unwrap().is_accepted());

        assert_eq!(pump_search_leaders(&p1, 2, &lim).unwrap(), None);
    }

    #[test]
    fn leaders_are_supported() {
        // one leader in state l; x,l -> y,y ; y outputs 1. computes x ≥ 1 on the domain
        let p = Protocol::new(
            vec!["x".into(), "l".into(), "y".into()],
            vec![Transition::new(0, 1, 2, 2), Transition::new(0, 2, 2, 2), Transition::new(1, 2, 2, 2)],
            Configuration::from_small(&[0, 1, 0]),
            "x",
            0,
            vec![false, false, true],
        )
        .unwrap();
        let p = crate::model::normalize_protocol(&p, false).unwrap().protocol;
        let lim = Limits::default();
        let cert = pump_search_leaders(&p, 6, &lim).unwrap().unwrap();
        assert!(check_certificate(&p, &cert, &lim).unwrap().is_accepted());
    }

    #[test]
    fn no_stable_configuration_within_limits() {
        let p = flock_binary(2).unwrap();
        let lim = Limits { max_nodes: 1, ..Limits::default() };
        assert!(matches!(stabilization_chain(&p, 4, &lim), Err(PumpError::NoStableReached(_))));
    }
}
