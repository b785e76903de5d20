//! `popproto`: command-line front end for the population-protocol analyses.
//!
//! Exit codes: 0 success or accept, 1 reject or nothing found, 2 usage or
//! input error, 3 resource limit or timeout, 4 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use popproto::dioph::{DiophError, XiFormula};
use popproto::generators::GenError;
use popproto::pump::PumpError;
use popproto::reach::ReachError;
use popproto::{Limits, ModelError};

#[derive(Parser, Debug)]
#[command(name = "popproto", version, about = "Exact analysis of single-input population protocols")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format; `structured` prints JSON with sorted keys and decimal-string numbers.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Wall-clock budget in seconds; partial results are flagged `partial: true`.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
    /// Largest reachability graph explored for a single configuration.
    #[arg(long, global = true, default_value_t = Limits::default().max_nodes)]
    pub max_nodes: usize,
    /// Largest antichain kept by backward coverability.
    #[arg(long, global = true, default_value_t = Limits::default().max_antichain)]
    pub max_antichain: usize,
    /// Write the main artifact (protocol, decomposition, certificate) to this file.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    /// `ξ = 2(2|T|+1)^|Q|`
    General,
    /// `ξ = 2(|Q|+2)^|Q|`, deterministic protocols only
    Deterministic,
}

impl From<Formula> for XiFormula {
    fn from(f: Formula) -> Self {
        match f {
            Formula::General => XiFormula::General,
            Formula::Deterministic => XiFormula::Deterministic,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a protocol file.
    Gen(commands::GenArgs),
    /// Check that a protocol computes `x ≥ η` on inputs 2..=max-input.
    Verify(commands::VerifyArgs),
    /// Explore the configurations reachable from an input or configuration.
    Reach(commands::ReachArgs),
    /// Ideal decomposition of a stable set.
    StableBasis(commands::StableBasisArgs),
    /// Hilbert basis of the potentially-realisable-multiset system with ξ.
    Pottier(commands::PottierArgs),
    /// Saturation sequence `IC(3^j) →σ C` with every state populated.
    Saturate(commands::SaturateArgs),
    /// Build a pumping certificate bounding any threshold the protocol computes.
    Certify(commands::CertifyArgs),
    /// Check a pumping certificate independently.
    Check(commands::CheckArgs),
    /// Print the theoretical constants for `n` states or for a protocol.
    Constants(commands::ConstantsArgs),
    /// Busy-beaver search over all canonical n-state leaderless protocols.
    Busybeaver(commands::BusyBeaverArgs),
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Limit(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Limit(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Limit(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::LimitExceeded { .. } => CliError::Limit(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ReachError> for CliError {
    fn from(e: ReachError) -> Self {
        match e {
            ReachError::LimitExceeded(_) => CliError::Limit(e.to_string()),
            ReachError::InvariantViolated(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<DiophError> for CliError {
    fn from(e: DiophError) -> Self {
        match e {
            DiophError::LimitExceeded(_) => CliError::Limit(e.to_string()),
            DiophError::Internal(_) | DiophError::NoDecomposition => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<PumpError> for CliError {
    fn from(e: PumpError) -> Self {
        match e {
            _ if e.is_limit() => CliError::Limit(e.to_string()),
            PumpError::Reach(r) => r.into(),
            PumpError::Dioph(d) => d.into(),
            PumpError::InvariantViolated(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl Global {
    pub fn limits(&self) -> Result<Limits, CliError> {
        let deadline = match self.timeout {
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(CliError::Usage("--timeout must be a positive number of seconds".into()))
            }
            Some(t) => Some(Instant::now() + Duration::from_secs_f64(t)),
            None => None,
        };
        if self.max_nodes == 0 || self.max_antichain == 0 {
            return Err(CliError::Usage("limits must be positive".into()));
        }
        Ok(Limits { max_nodes: self.max_nodes, max_antichain: self.max_antichain, deadline, ..Limits::default() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if cli.global.format == Format::Structured {
                let partial = matches!(e, CliError::Limit(_));
                let status = match e {
                    CliError::Usage(_) => "usage",
                    CliError::Limit(_) => "limit",
                    CliError::Internal(_) => "internal",
                };
                let v = serde_json::json!({ "error": e.message(), "partial": partial, "status": status });
                commands::out(&serde_json::to_string_pretty(&v).expect("json"));
            }
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
