//! Homogeneous linear Diophantine inequalities `A·y ≥ 0`: Hilbert bases,
//! Pottier's norm bound, and the system whose solutions are the potentially
//! realisable transition multisets of a leaderless protocol.

mod hilbert;
mod realisable;

use num_bigint::BigUint;
use thiserror::Error;

use crate::model::ModelError;

pub use hilbert::{decompose_solution, hilbert_basis};
pub use realisable::{
    allempty_extract, pottier_constant, realisable_basis, realisable_system, AllEmpty, RealisableBasis,
    RealisableElement, XiFormula,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DiophError {
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("vector is not a solution of the system")]
    NotASolution,
    #[error("solution has no decomposition over the basis (incomplete basis)")]
    NoDecomposition,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("the realisable-multiset system is only defined for leaderless protocols")]
    NotLeaderless,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `A·y ≥ 0` over naturals, one row per inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophSystem {
    vars: usize,
    rows: Vec<Vec<i64>>,
}

impl DiophSystem {
    pub fn new(vars: usize, rows: Vec<Vec<i64>>) -> Result<Self, DiophError> {
        if let Some(r) = rows.iter().find(|r| r.len() != vars) {
            return Err(DiophError::Malformed(format!("row of length {} in a system with {vars} variables", r.len())));
        }
        if rows.iter().flatten().any(|a| a.unsigned_abs() > 1 << 20) {
            return Err(DiophError::Malformed("coefficients must lie within ±2^20".into()));
        }
        Ok(Self { vars, rows })
    }

    /// Builds from a non-empty list of equally long rows.
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, DiophError> {
        let vars = rows.first().map(Vec::len).ok_or_else(|| {
            DiophError::Malformed("cannot infer the number of variables from an empty matrix".into())
        })?;
        Self::new(vars, rows)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn is_solution(&self, y: &[u64]) -> bool {
        y.len() == self.vars
            && self.rows.iter().all(|row| row.iter().zip(y).map(|(&a, &x)| a as i128 * x as i128).sum::<i128>() >= 0)
    }
}

/// `(1 + max_i Σ_j |a_ij|)^e`: every Hilbert basis element has 1-norm at most this.
pub fn pottier_bound(sys: &DiophSystem) -> BigUint {
    let width: u64 = sys.rows.iter().map(|r| r.iter().map(|a| a.unsigned_abs()).sum()).max().unwrap_or(0);
    BigUint::from(1 + width).pow(sys.rows.len() as u32)
}
