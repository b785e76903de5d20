//! Busy-beaver search over tiny leaderless protocols: which thresholds
//! `x ≥ η` can `n` states compute?
//!
//! Inputs start at 2, so a protocol that always outputs 1 computes `x ≥ 2`.
//! A "computes `x ≥ η`" verdict means: the protocol decides every input in
//! `[2, cutoff]` according to `x ≥ η`, and an independently checked pumping
//! certificate bounds any threshold it computes by `a ≤ cutoff`.

use num_bigint::BigUint;

use crate::dioph::XiFormula;
use crate::generators::{enumerate_protocols, EnumOptions, GenError};
use crate::limits::Limits;
use crate::model::{normalize_protocol, Protocol};
use crate::pump::{build_leaderless_certificate, check_certificate, CheckOutcome, LeaderlessOptions, PumpError};
use crate::reach::{evaluate_input, verify_threshold, InputValue, ReachError, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    /// Decides `x ≥ eta` on `[2, cutoff]`, with a checked bound `eta ≤ certified`.
    ComputesThreshold { eta: u64, certified: BigUint },
    /// Decides every input up to the cutoff, but not as a threshold.
    ComputesNonThreshold { reason: String },
    /// Some input has no stable output.
    DoesNotCompute { input: u64 },
    /// The limits were too small to decide.
    Undecided { reason: String },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::ComputesThreshold { .. } => "threshold",
            Classification::ComputesNonThreshold { .. } => "non-threshold",
            Classification::DoesNotCompute { .. } => "does-not-compute",
            Classification::Undecided { .. } => "undecided",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub cutoff: u64,
    pub formula: XiFormula,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { cutoff: Limits::default().cutoff, formula: XiFormula::General }
    }
}

fn undecided(reason: impl Into<String>) -> Classification {
    Classification::Undecided { reason: reason.into() }
}

/// Classifies a leaderless protocol at desk scale.
///
/// Inputs `2..=cutoff` are evaluated exactly. A non-monotone pattern rules
/// out thresholds at once; otherwise a leaderless certificate with
/// `a ≤ cutoff` pins the only possible threshold inside the tested range.
pub fn classify_protocol(p: &Protocol, opts: &ClassifyOptions, limits: &Limits) -> Result<Classification, PumpError> {
    if !p.is_leaderless() {
        return Err(PumpError::NotLeaderless);
    }
    if opts.cutoff < 2 {
        return Err(PumpError::PreconditionFailed("cutoff must be at least 2".into()));
    }
    let p = normalize_protocol(p, true)?.protocol;
    let mut values = Vec::new();
    for i in 2..=opts.cutoff {
        match evaluate_input(&p, i, limits) {
            Ok(InputValue::Decided(b)) => values.push(b),
            Ok(InputValue::Undefined { .. }) => return Ok(Classification::DoesNotCompute { input: i }),
            Err(ReachError::LimitExceeded(m)) => return Ok(undecided(format!("input {i}: {m}"))),
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(k) = values.windows(2).position(|w| w[0] && !w[1]) {
        return Ok(Classification::ComputesNonThreshold {
            reason: format!("input {} is accepted but {} is rejected", k + 2, k + 3),
        });
    }
    let first_one = values.iter().position(|&b| b).map(|k| k as u64 + 2);

    let lopts = LeaderlessOptions { formula: opts.formula, max_scale: None, max_a: Some(opts.cutoff) };
    let build = match build_leaderless_certificate(&p, &lopts, limits) {
        Ok(b) => b,
        Err(e) if e.is_limit() => return Ok(undecided(format!("no certificate within the cutoff: {e}"))),
        Err(e) => return Err(e),
    };
    let cert = build.certificate;
    match check_certificate(&p, &cert, limits)? {
        CheckOutcome::Accepted { .. } => {}
        CheckOutcome::Rejected(v) => {
            return Err(PumpError::InvariantViolated(format!("built certificate rejected: {v}")));
        }
    }
    let a = cert.a;
    let Some(eta) = first_one else {
        // a threshold would have to be at most a ≤ cutoff, yet nothing up to the cutoff is accepted
        return Ok(Classification::ComputesNonThreshold {
            reason: format!("rejects every input up to {} but any threshold is at most {a}", opts.cutoff),
        });
    };
    if BigUint::from(eta) > a {
        return Err(PumpError::InvariantViolated(format!("threshold {eta} exceeds certified bound {a}")));
    }
    match verify_threshold(&p, eta, opts.cutoff, limits)? {
        Verdict::Accept => Ok(Classification::ComputesThreshold { eta, certified: a }),
        Verdict::Reject(c) => Err(PumpError::InvariantViolated(format!(
            "verification of x ≥ {eta} failed at input {} after exact evaluation accepted it",
            c.input
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct BBOptions {
    pub deterministic: bool,
    pub classify: ClassifyOptions,
}

impl Default for BBOptions {
    fn default() -> Self {
        Self { deterministic: true, classify: ClassifyOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct BBReport {
    pub n: usize,
    pub deterministic: bool,
    pub cutoff: u64,
    /// Largest certified threshold and the first protocol reaching it.
    pub best: Option<(Protocol, u64)>,
    pub entries: Vec<(Protocol, Classification)>,
    /// Set when the deadline interrupted the enumeration.
    pub partial: bool,
}

impl BBReport {
    pub fn count(&self, label: &str) -> usize {
        self.entries.iter().filter(|(_, c)| c.label() == label).count()
    }

    pub fn undecided(&self) -> usize {
        self.count("undecided")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BBError {
    #[error(transparent)]
    Enumeration(#[from] GenError),
    #[error("protocol {index}: {source}")]
    Classification { index: usize, source: PumpError },
}

/// Classifies every canonical `n`-state protocol in enumeration order.
pub fn busy_beaver_search(n: usize, opts: &BBOptions, limits: &Limits) -> Result<BBReport, BBError> {
    let enum_opts = EnumOptions { deterministic: opts.deterministic, ..EnumOptions::default() };
    let mut report = BBReport {
        n,
        deterministic: opts.deterministic,
        cutoff: opts.classify.cutoff,
        best: None,
        entries: Vec::new(),
        partial: false,
    };
    for (index, p) in enumerate_protocols(n, &enum_opts)?.enumerate() {
        if limits.expired() {
            report.partial = true;
            break;
        }
        let verdict =
            classify_protocol(&p, &opts.classify, limits).map_err(|source| BBError::Classification { index, source })?;
        if let Classification::ComputesThreshold { eta, .. } = verdict {
            if report.best.as_ref().is_none_or(|(_, best)| eta > *best) {
                report.best = Some((p.clone(), eta));
            }
        }
        report.entries.push((p, verdict));
    }
    Ok(report)
}
