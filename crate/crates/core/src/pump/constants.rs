use num_bigint::BigUint;

use super::PumpError;
use crate::dioph::{pottier_constant, XiFormula};
use crate::model::Protocol;
use crate::pow2::{factorial, ScaledPow2};
use crate::reach::{small_basis_constant, small_basis_norm_bound};

/// The theoretical constants behind the threshold bound `η ≤ ξ·n·β·3^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constants {
    pub n: usize,
    pub transitions: usize,
    /// `2^(2(2n+1)!+1)`
    pub beta: ScaledPow2,
    /// `2^((2n+2)!)`
    pub theta: ScaledPow2,
    pub xi: BigUint,
    /// `ξ·n·β·3^n`
    pub final_bound: ScaledPow2,
}

impl Constants {
    /// `ξ·n·β·3^n ≤ 2^((2n+2)!)`.
    pub fn final_bound_holds(&self) -> bool {
        self.final_bound.at_most_pow2(&self.theta.exponent)
    }
}

/// Constants for `n` states, with `ξ` given.
pub fn constants_for(n: usize, transitions: usize, xi: BigUint) -> Constants {
    let beta = small_basis_norm_bound(n);
    let factor = &xi * BigUint::from(n) * BigUint::from(3u32).pow(n as u32);
    Constants { n, transitions, final_bound: beta.times(&factor), beta, theta: small_basis_constant(n), xi }
}

/// The general `ξ = 2(2|T|+1)^n` for `n` states and `t` transitions.
pub fn general_xi(n: usize, transitions: usize) -> BigUint {
    BigUint::from(2 * transitions as u64 + 1).pow(n as u32) * 2u32
}

/// Largest possible transition count on `n` states: every pair to every pair.
pub fn max_transitions(n: usize) -> usize {
    let pairs = n * (n + 1) / 2;
    pairs * pairs
}

/// Constants of `p`; fails if the final inequality does not hold for `n ≥ 2`.
pub fn theoretical_constants(p: &Protocol, formula: XiFormula) -> Result<Constants, PumpError> {
    let c = constants_for(p.num_states(), p.transitions().len(), pottier_constant(p, formula));
    if c.n >= 2 && !c.final_bound_holds() {
        return Err(PumpError::InvariantViolated(format!(
            "ξ·n·β·3^n exceeds 2^{} for n = {}",
            factorial(2 * c.n as u64 + 2),
            c.n
        )));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::flock_binary;

    #[test]
    fn flock_one_constants() {
        let p = flock_binary(1).unwrap();
        let c = theoretical_constants(&p, XiFormula::General).unwrap();
        assert_eq!(c.xi, BigUint::from(4394u32));
        assert_eq!(c.n, 3);
        assert!(c.final_bound_holds());
    }

    #[test]
    fn two_states() {
        let c = constants_for(2, max_transitions(2), general_xi(2, max_transitions(2)));
        assert_eq!(c.beta, ScaledPow2::pow2(BigUint::from(241u32)));
        assert!(c.final_bound_holds());
        assert!(c.final_bound.bits() <= BigUint::from(720u32));
    }

    #[test]
    fn one_state_is_exempt() {
        // (2n+2)! = 24 is too small for β = 2^13 times the rest to matter; only n ≥ 2 is claimed
        let c = constants_for(1, 1, general_xi(1, 1));
        assert!(c.final_bound.bits() > BigUint::from(0u32));
    }
}
