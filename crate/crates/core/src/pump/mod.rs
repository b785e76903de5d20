//! Pumping: saturation sequences, stabilization chains, certificate
//! construction and independent checking, and the theoretical constants.

mod certificate;
mod chain;
mod constants;
mod leaderless;
mod saturation;

use thiserror::Error;

use crate::dioph::DiophError;
use crate::model::ModelError;
use crate::reach::ReachError;

pub use certificate::{
    certificate_from_file, certificate_to_file, certificate_to_string, check_certificate, parse_certificate,
    Certificate, CertificateFile, CheckOutcome, Variant, Violation, D_TO_E, INITIAL_TO_D, INITIAL_TO_E, PUMP,
    PUMP_LITERAL,
};
pub use chain::{pump_search_leaders, stabilization_chain, ChainLink};
pub use constants::{constants_for, general_xi, max_transitions, theoretical_constants, Constants};
pub use leaderless::{build_leaderless_certificate, concentrate, Concentrated, LeaderlessBuild, LeaderlessOptions};
pub use saturation::{find_escaping_transition, saturation_sequence, Saturation};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PumpError {
    #[error("no escaping transition: {0}")]
    NoEscape(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("this construction needs a leaderless protocol")]
    NotLeaderless,
    #[error("no stable configuration reached: {0}")]
    NoStableReached(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolated(String),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Dioph(#[from] DiophError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl PumpError {
    /// Whether the failure is due to resource limits rather than the input.
    pub fn is_limit(&self) -> bool {
        matches!(
            self,
            PumpError::LimitExceeded(_)
                | PumpError::NoStableReached(_)
                | PumpError::Reach(ReachError::LimitExceeded(_))
                | PumpError::Dioph(DiophError::LimitExceeded(_))
        )
    }
}
