//! Exact naturals of the form `m · 2^e` whose exponent may be far too large
//! to materialize (the small-basis constants have exponents like `13!`).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Values up to this many bits are printed in decimal.
const MATERIALIZE_BITS: u64 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledPow2 {
    pub mantissa: BigUint,
    pub exponent: BigUint,
}

impl ScaledPow2 {
    pub fn pow2(exponent: BigUint) -> Self {
        Self { mantissa: BigUint::one(), exponent }
    }

    pub fn times(&self, k: &BigUint) -> Self {
        Self { mantissa: &self.mantissa * k, exponent: self.exponent.clone() }
    }

    /// Bits of the represented number, `⌊log₂ v⌋ + 1` (0 for zero).
    pub fn bits(&self) -> BigUint {
        if self.mantissa.is_zero() {
            return BigUint::zero();
        }
        BigUint::from(self.mantissa.bits()) + &self.exponent
    }

    /// `self ≤ 2^k`.
    pub fn at_most_pow2(&self, k: &BigUint) -> bool {
        if self.mantissa.is_zero() {
            return true;
        }
        if self.exponent > *k {
            return false;
        }
        // m·2^e ≤ 2^k  ⇔  m ≤ 2^(k−e)  ⇔  bits(m − 1) ≤ k − e
        BigUint::from((&self.mantissa - 1u32).bits()) <= k - &self.exponent
    }

    /// The exact value, if it has at most `max_bits` bits.
    pub fn to_biguint(&self, max_bits: u64) -> Option<BigUint> {
        let bits = self.bits().to_u64()?;
        if bits > max_bits {
            return None;
        }
        Some(&self.mantissa << self.exponent.to_u64()?)
    }
}

/// Compares a materialized number with `2^k` without expanding the power.
pub fn cmp_pow2(x: &BigUint, k: &BigUint) -> Ordering {
    let bits = BigUint::from(x.bits());
    let k1 = k + 1u32;
    if bits < k1 {
        Ordering::Less
    } else if bits > k1 {
        Ordering::Greater
    } else if x.trailing_zeros() == k.to_u64() {
        Ordering::Equal
    } else {
        Ordering::Greater
    }
}

impl fmt::Display for ScaledPow2 {
    /// Decimal when small enough, otherwise `m*2^e` with decimal parts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_biguint(MATERIALIZE_BITS) {
            Some(v) => write!(f, "{v}"),
            None if self.mantissa.is_one() => write!(f, "2^{}", self.exponent),
            None => write!(f, "{}*2^{}", self.mantissa, self.exponent),
        }
    }
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}
