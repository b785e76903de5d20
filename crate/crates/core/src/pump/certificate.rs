use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::PumpError;
use crate::limits::Limits;
use crate::model::format::{
    config_from_map, config_to_map, transition_from_file, transition_to_file, witness_from_file, witness_to_file,
    ConfigMap, Count, WitnessFile,
};
use crate::model::{
    apply_parikh, realize, replay, Configuration, ExecutionWitness, ModelError, Protocol, StateId, TransitionMultiset,
};
use crate::reach::{cylinder_avoids, unstable_basis};

/// Witness names used by the two certificate variants.
pub const INITIAL_TO_E: &str = "initial_to_e";
pub const PUMP: &str = "pump";
pub const PUMP_LITERAL: &str = "pump_literal";
pub const INITIAL_TO_D: &str = "initial_to_d";
pub const D_TO_E: &str = "d_to_e";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `IC(a) →* E`, `E + ℕ^S ⊆ 𝒮`, and `E + b·x →* E + D_b` (or `b·x →* D_b`).
    WithLeaders,
    /// `IC(a) →* D →* E`, `E + ℕ^S ⊆ 𝒮`, `IC(b) ⇒^π D_b ∈ ℕ^S`, `D` 2|π|-saturated.
    Leaderless,
}

/// Evidence that any threshold `x ≥ η` computed by the protocol has `η ≤ a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub variant: Variant,
    pub a: BigUint,
    pub b: BigUint,
    /// Sorted free states `S`.
    pub free: Vec<StateId>,
    pub e: Configuration,
    pub d_b: Configuration,
    pub witnesses: BTreeMap<String, ExecutionWitness>,
    pub d: Option<Configuration>,
    pub pi: Option<TransitionMultiset>,
}

/// The first condition a rejected certificate violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Malformed(String),
    ThresholdBelowTwo,
    EmptyPump,
    MissingWitness(String),
    Replay { witness: String, reason: String },
    WrongEndpoint { witness: String, expected: String, reached: String },
    NotStable,
    PumpOutsideFree,
    NotLeaderless,
    ParikhMismatch { expected: String, reached: String },
    NotSaturated { required: BigUint },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed(m) => write!(f, "malformed certificate: {m}"),
            Violation::ThresholdBelowTwo => write!(f, "a must be at least 2"),
            Violation::EmptyPump => write!(f, "b must be at least 1"),
            Violation::MissingWitness(w) => write!(f, "witness `{w}` is missing"),
            Violation::Replay { witness, reason } => write!(f, "witness `{witness}` does not replay: {reason}"),
            Violation::WrongEndpoint { witness, expected, reached } => {
                write!(f, "witness `{witness}` reaches {reached} instead of {expected}")
            }
            Violation::NotStable => write!(f, "E + ℕ^S is not contained in a stable set"),
            Violation::PumpOutsideFree => write!(f, "D_b populates a state outside S"),
            Violation::NotLeaderless => write!(f, "the leaderless variant needs a leaderless protocol"),
            Violation::ParikhMismatch { expected, reached } => {
                write!(f, "IC(b) ⇒^π gives {reached} instead of D_b = {expected}")
            }
            Violation::NotSaturated { required } => write!(f, "D is not {required}-saturated"),
        }
    }
}

impl Violation {
    /// Short machine-readable name of the violated condition.
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Malformed(_) => "malformed",
            Violation::ThresholdBelowTwo => "a_at_least_two",
            Violation::EmptyPump => "b_positive",
            Violation::MissingWitness(_) => "witness_present",
            Violation::Replay { .. } => "witness_replay",
            Violation::WrongEndpoint { .. } => "witness_endpoint",
            Violation::NotStable => "cylinder_stable",
            Violation::PumpOutsideFree => "pump_in_free_states",
            Violation::NotLeaderless => "leaderless",
            Violation::ParikhMismatch { .. } => "potential_step",
            Violation::NotSaturated { .. } => "saturation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    /// Every configuration of `E + ℕ^S` is stable with this output.
    Accepted { output: bool },
    Rejected(Violation),
}

impl CheckOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CheckOutcome::Accepted { .. })
    }
}

fn replay_to(
    p: &Protocol,
    name: &str,
    cert: &Certificate,
    start: &Configuration,
    end: &Configuration,
) -> Result<(), Violation> {
    let w = cert.witnesses.get(name).ok_or_else(|| Violation::MissingWitness(name.to_string()))?;
    let reached =
        replay(p, start, w).map_err(|e| Violation::Replay { witness: name.to_string(), reason: e.to_string() })?;
    if &reached != end {
        return Err(Violation::WrongEndpoint {
            witness: name.to_string(),
            expected: p.show(end),
            reached: p.show(&reached),
        });
    }
    Ok(())
}

fn check_shape(p: &Protocol, cert: &Certificate) -> Result<(), Violation> {
    let n = p.num_states();
    let mut dims = vec![cert.e.dim(), cert.d_b.dim()];
    dims.extend(cert.d.as_ref().map(Configuration::dim));
    if dims.iter().any(|&d| d != n) {
        return Err(Violation::Malformed("configuration dimension differs from the protocol".into()));
    }
    if cert.free.iter().any(|&q| q >= n) || cert.free.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Violation::Malformed("free states must be sorted, distinct protocol states".into()));
    }
    if let Some(pi) = &cert.pi {
        if pi.counts().len() != p.transitions().len() {
            return Err(Violation::Malformed("π has the wrong number of transitions".into()));
        }
    }
    Ok(())
}

/// Verifies every condition of `cert` by replay and backward coverability.
/// Independent of how the certificate was built.
pub fn check_certificate(p: &Protocol, cert: &Certificate, limits: &Limits) -> Result<CheckOutcome, PumpError> {
    match check_inner(p, cert, limits) {
        Ok(output) => Ok(CheckOutcome::Accepted { output }),
        Err(Ok(v)) => Ok(CheckOutcome::Rejected(v)),
        Err(Err(e)) => Err(e),
    }
}

fn check_inner(p: &Protocol, cert: &Certificate, limits: &Limits) -> Result<bool, Result<Violation, PumpError>> {
    let reject = |v: Violation| Err(Ok(v));
    check_shape(p, cert).map_err(Ok)?;
    if cert.a < BigUint::from(2u32) {
        return reject(Violation::ThresholdBelowTwo);
    }
    if cert.b.is_zero() {
        return reject(Violation::EmptyPump);
    }
    let x = p.input_state();
    let initial = p.input_config(&cert.a);
    match cert.variant {
        Variant::WithLeaders => {
            replay_to(p, INITIAL_TO_E, cert, &initial, &cert.e).map_err(Ok)?;
        }
        Variant::Leaderless => {
            if !p.is_leaderless() {
                return reject(Violation::NotLeaderless);
            }
            let d = cert.d.as_ref().ok_or_else(|| Ok(Violation::Malformed("leaderless certificate without D".into())))?;
            replay_to(p, INITIAL_TO_D, cert, &initial, d).map_err(Ok)?;
            replay_to(p, D_TO_E, cert, d, &cert.e).map_err(Ok)?;
        }
    }

    let mut output = None;
    for b in [false, true] {
        let basis = unstable_basis(p, b, limits).map_err(|e| Err(e.into()))?;
        if cylinder_avoids(&cert.e, &cert.free, &basis) {
            output = Some(b);
            break;
        }
    }
    let Some(output) = output else { return reject(Violation::NotStable) };

    if (0..p.num_states()).any(|q| cert.free.binary_search(&q).is_err() && !cert.d_b.get(q).is_zero()) {
        return reject(Violation::PumpOutsideFree);
    }

    match cert.variant {
        Variant::WithLeaders => {
            let bx = Configuration::unit(p.num_states(), x).scale(&cert.b);
            if cert.witnesses.contains_key(PUMP) {
                replay_to(p, PUMP, cert, &(&cert.e + &bx), &(&cert.e + &cert.d_b)).map_err(Ok)?;
            } else if cert.witnesses.contains_key(PUMP_LITERAL) {
                replay_to(p, PUMP_LITERAL, cert, &bx, &cert.d_b).map_err(Ok)?;
            } else {
                return reject(Violation::MissingWitness(PUMP.to_string()));
            }
        }
        Variant::Leaderless => {
            let pi = cert.pi.as_ref().ok_or_else(|| Ok(Violation::Malformed("leaderless certificate without π".into())))?;
            let d = cert.d.as_ref().expect("checked above");
            let mismatch = |reached: String| Violation::ParikhMismatch { expected: p.show(&cert.d_b), reached };
            match apply_parikh(p, &p.input_config(&cert.b), pi) {
                Ok(c) if c == cert.d_b => {}
                Ok(c) => return reject(mismatch(p.show(&c))),
                Err(_) => return reject(mismatch("a negative count".into())),
            }
            let required = pi.size() * 2u32;
            if !d.is_saturated(&required) {
                return reject(Violation::NotSaturated { required });
            }
            // the pumping step D + IC(b) → D + D_b, realised concretely
            let start = d + &p.input_config(&cert.b);
            let sigma = realize(p, &start, pi).map_err(|e| Err(e.into()))?;
            let end = replay(p, &start, &ExecutionWitness::Steps(sigma)).map_err(|e| Err(e.into()))?;
            if end != d + &cert.d_b {
                return Err(Err(PumpError::InvariantViolated("realised pumping step disagrees with ⇒^π".into())));
            }
        }
    }
    Ok(output)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub variant: Variant,
    pub a: Count,
    pub b: Count,
    pub free: Vec<String>,
    pub e: ConfigMap,
    pub d_b: ConfigMap,
    pub witnesses: BTreeMap<String, WitnessFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<ConfigMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<([String; 4], Count)>>,
}

pub fn certificate_to_file(p: &Protocol, c: &Certificate) -> CertificateFile {
    CertificateFile {
        variant: c.variant,
        a: Count(c.a.clone()),
        b: Count(c.b.clone()),
        free: c.free.iter().map(|&q| p.state_name(q).to_string()).collect(),
        e: config_to_map(p, &c.e),
        d_b: config_to_map(p, &c.d_b),
        witnesses: c.witnesses.iter().map(|(k, w)| (k.clone(), witness_to_file(p, w))).collect(),
        d: c.d.as_ref().map(|d| config_to_map(p, d)),
        pi: c.pi.as_ref().map(|pi| {
            p.transitions()
                .iter()
                .zip(pi.counts())
                .filter(|(_, k)| !k.is_zero())
                .map(|(t, k)| (transition_to_file(p, t), Count(k.clone())))
                .collect()
        }),
    }
}

pub fn certificate_from_file(p: &Protocol, f: &CertificateFile) -> Result<Certificate, ModelError> {
    let mut free = f
        .free
        .iter()
        .map(|s| p.state_id(s).ok_or_else(|| ModelError::Format(format!("unknown state `{s}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    free.sort_unstable();
    free.dedup();
    let pi = match &f.pi {
        None => None,
        Some(entries) => {
            let mut pi = TransitionMultiset::empty(p.transitions().len());
            for (t, k) in entries {
                let t = transition_from_file(p, t)?;
                let idx = p
                    .transition_index(&t)
                    .ok_or_else(|| ModelError::UnknownTransition(p.show_transition(&t)))?;
                pi.add(idx, &k.0);
            }
            Some(pi)
        }
    };
    Ok(Certificate {
        variant: f.variant,
        a: f.a.0.clone(),
        b: f.b.0.clone(),
        free,
        e: config_from_map(p, &f.e)?,
        d_b: config_from_map(p, &f.d_b)?,
        witnesses: f
            .witnesses
            .iter()
            .map(|(k, w)| Ok((k.clone(), witness_from_file(p, w)?)))
            .collect::<Result<_, ModelError>>()?,
        d: f.d.as_ref().map(|d| config_from_map(p, d)).transpose()?,
        pi,
    })
}

pub fn certificate_to_string(p: &Protocol, c: &Certificate) -> String {
    serde_json::to_string_pretty(&certificate_to_file(p, c)).expect("certificate serializes")
}

pub fn parse_certificate(p: &Protocol, text: &str) -> Result<Certificate, ModelError> {
    let f: CertificateFile = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
    certificate_from_file(p, &f)
}
