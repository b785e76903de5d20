use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::StateId;

/// A multiset of agents over the states of a protocol.
///
/// Counts are arbitrary precision; the vector is indexed by [`StateId`] and
/// always has one entry per state of the owning protocol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    counts: Vec<BigUint>,
}

impl Configuration {
    pub fn zero(states: usize) -> Self {
        Self { counts: vec![BigUint::zero(); states] }
    }

    pub fn unit(states: usize, q: StateId) -> Self {
        let mut c = Self::zero(states);
        c.counts[q] = BigUint::from(1u32);
        c
    }

    pub fn from_counts(counts: Vec<BigUint>) -> Self {
        Self { counts }
    }

    pub fn from_small(counts: &[u64]) -> Self {
        Self { counts: counts.iter().map(|&c| BigUint::from(c)).collect() }
    }

    /// Builds a configuration from `(state, count)` pairs; repeated states add up.
    pub fn from_pairs(states: usize, pairs: &[(StateId, u64)]) -> Self {
        let mut c = Self::zero(states);
        for &(q, n) in pairs {
            c.counts[q] += BigUint::from(n);
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, q: StateId) -> &BigUint {
        &self.counts[q]
    }

    pub fn set(&mut self, q: StateId, value: BigUint) {
        self.counts[q] = value;
    }

    pub fn add_to(&mut self, q: StateId, n: &BigUint) {
        self.counts[q] += n;
    }

    pub fn size(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(Zero::is_zero)
    }

    pub fn support(&self) -> Vec<StateId> {
        (0..self.dim()).filter(|&q| !self.counts[q].is_zero()).collect()
    }

    /// Sum of the counts of the given states.
    pub fn count_in(&self, states: impl IntoIterator<Item = StateId>) -> BigUint {
        states.into_iter().map(|q| &self.counts[q]).sum()
    }

    /// Componentwise order `self <= other`.
    pub fn le(&self, other: &Configuration) -> bool {
        debug_assert_eq!(self.dim(), other.dim());
        self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    /// Every state holds at least `j` agents.
    pub fn is_saturated(&self, j: &BigUint) -> bool {
        self.counts.iter().all(|c| c >= j)
    }

    /// `self - other`, or `None` if some coordinate would become negative.
    pub fn checked_sub(&self, other: &Configuration) -> Option<Configuration> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut counts = Vec::with_capacity(self.dim());
        for (a, b) in self.counts.iter().zip(&other.counts) {
            if a < b {
                return None;
            }
            counts.push(a - b);
        }
        Some(Configuration { counts })
    }

    pub fn scale(&self, k: &BigUint) -> Configuration {
        Configuration { counts: self.counts.iter().map(|c| c * k).collect() }
    }

    /// Compact copy for exhaustive exploration; `None` if a count exceeds `u32`.
    pub fn to_small(&self) -> Option<Box<[u32]>> {
        self.counts.iter().map(|c| c.to_u32()).collect()
    }

    pub fn from_u32(counts: &[u32]) -> Self {
        Self { counts: counts.iter().map(|&c| BigUint::from(c)).collect() }
    }

    /// Compact copy with `u64` counts; `None` on overflow.
    pub fn to_u64s(&self) -> Option<Vec<u64>> {
        self.counts.iter().map(|c| c.to_u64()).collect()
    }
}

impl Add for &Configuration {
    type Output = Configuration;

    fn add(self, rhs: &Configuration) -> Configuration {
        debug_assert_eq!(self.dim(), rhs.dim());
        Configuration {
            counts: self.counts.iter().zip(&rhs.counts).map(|(a, b)| a + b).collect(),
        }
    }
}

impl AddAssign<&Configuration> for Configuration {
    fn add_assign(&mut self, rhs: &Configuration) {
        for (a, b) in self.counts.iter_mut().zip(&rhs.counts) {
            *a += b;
        }
    }
}

impl fmt::Display for Configuration {
    /// `⟦3·q0, 1·q2⟧` style, listing state indices; see [`super::Protocol::show`]
    /// for the named form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟦")?;
        let mut first = true;
        for (q, c) in self.counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{c}·#{q}")?;
        }
        write!(f, "⟧")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_subtraction() {
        let a = Configuration::from_small(&[1, 0, 2]);
        let b = Configuration::from_small(&[2, 0, 2]);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert_eq!(b.checked_sub(&a), Some(Configuration::from_small(&[1, 0, 0])));
        assert_eq!(a.checked_sub(&b), None);
        assert_eq!((&a + &b).size(), BigUint::from(7u32));
    }

    #[test]
    fn support_and_saturation() {
        let c = Configuration::from_small(&[3, 0, 1]);
        assert_eq!(c.support(), vec![0, 2]);
        assert!(!c.is_saturated(&BigUint::from(1u32)));
        assert!(c.scale(&BigUint::from(2u32)).is_saturated(&BigUint::zero()));
        assert_eq!(Configuration::from_pairs(3, &[(1, 2), (1, 1)]), Configuration::from_small(&[0, 3, 0]));
    }
}
