use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use popproto::bb::{busy_beaver_search, BBOptions, Classification, ClassifyOptions};
use popproto::dioph::{pottier_bound, realisable_basis};
use popproto::generators::{flock_binary, flock_unary};
use popproto::model::format::{config_to_map, parse_protocol, protocol_to_file, transition_to_file};
use popproto::model::normalize_protocol;
use popproto::pow2::ScaledPow2;
use popproto::pump::{
    build_leaderless_certificate, certificate_to_file, check_certificate, constants_for, general_xi, max_transitions,
    parse_certificate, pump_search_leaders, saturation_sequence, theoretical_constants, CheckOutcome, Constants,
    LeaderlessOptions,
};
use popproto::reach::{
    decomposition_to_file, describe, stable_set_ideals, verify_threshold, Polarity, ReachGraph, Verdict,
};
use popproto::{Configuration, Protocol, Transition, TransitionMultiset};

use crate::{CliError, Cli, Command, Format, Formula, Global};

type Outcome = Result<u8, CliError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    FlockUnary,
    FlockBinary,
    /// Random deterministic leaderless protocol (uses --seed).
    Random,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Parameter k of the flock protocols (threshold 2^k).
    #[arg(long, short, required_if_eq_any([("kind", "flock-unary"), ("kind", "flock-binary")]))]
    k: Option<u32>,
    /// Number of states of a random protocol.
    #[arg(long, default_value_t = 3)]
    states: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
pub struct ProtocolArg {
    /// Protocol file (JSON).
    #[arg(long, short)]
    protocol: PathBuf,
    /// Remove states that no input can populate before the analysis.
    #[arg(long)]
    strip_uncoverable: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
    #[arg(long)]
    eta: u64,
    #[arg(long)]
    max_input: u64,
}

#[derive(Args, Debug)]
pub struct ReachArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
    /// Start from the initial configuration of this input.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    input: Option<u64>,
    /// Start from a configuration written as `state=count,...`.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    S0,
    S1,
    S,
}

#[derive(Args, Debug)]
pub struct StableBasisArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = PolarityArg::S)]
    polarity: PolarityArg,
}

#[derive(Args, Debug)]
pub struct PottierArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = Formula::General)]
    formula: Formula,
}

#[derive(Args, Debug)]
pub struct SaturateArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Leaderless,
    WithLeaders,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Leaderless)]
    variant: VariantArg,
    /// Length of the stabilization chain searched by the with-leaders variant.
    #[arg(long, default_value_t = 20)]
    i_max: u64,
    /// Largest saturation multiplier tried by the leaderless variant.
    #[arg(long)]
    max_scale: Option<u64>,
    #[arg(long, value_enum, default_value_t = Formula::General)]
    formula: Formula,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    protocol: ProtocolArg,
    /// Certificate file (JSON).
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// Number of states; ξ uses the largest possible transition count unless --transitions is given.
    #[arg(long, short, conflicts_with = "protocol", required_unless_present = "protocol")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    transitions: Option<usize>,
    /// Compute the constants of this protocol instead.
    #[arg(long, short)]
    protocol: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Formula::General)]
    formula: Formula,
}

#[derive(Args, Debug)]
pub struct BusyBeaverArgs {
    /// Number of states.
    #[arg(short = 'n', long = "states")]
    n: usize,
    /// Include non-deterministic protocols.
    #[arg(long)]
    nondeterministic: bool,
    /// Largest input evaluated exactly per protocol.
    #[arg(long, default_value_t = popproto::Limits::default().cutoff)]
    cutoff: u64,
    #[arg(long, value_enum, default_value_t = Formula::General)]
    formula: Formula,
    /// Include the per-protocol verdict table in the output.
    #[arg(long)]
    table: bool,
}

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => gen(g, a),
        Command::Verify(a) => verify(g, a),
        Command::Reach(a) => reach(g, a),
        Command::StableBasis(a) => stable_basis(g, a),
        Command::Pottier(a) => pottier(g, a),
        Command::Saturate(a) => saturate(g, a),
        Command::Certify(a) => certify(g, a),
        Command::Check(a) => check(g, a),
        Command::Constants(a) => constants(g, a),
        Command::Busybeaver(a) => busybeaver(g, a),
    }
}

// ---------- helpers ----------

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(arg: &ProtocolArg) -> Result<Protocol, CliError> {
    let p = parse_protocol(&read(&arg.protocol)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", arg.protocol.display())))?;
    Ok(normalize_protocol(&p, arg.strip_uncoverable)?.protocol)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json")
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("json")
}

fn dec(n: impl ToString) -> Value {
    Value::String(n.to_string())
}

/// Prints the report in the chosen format.
fn emit(g: &Global, structured: Value, text: impl FnOnce() -> String) {
    match g.format {
        Format::Structured => out(&pretty(&structured)),
        Format::Text => out(&text()),
    }
}

/// Prints a line, ignoring a closed stdout (e.g. piped into `head`).
pub fn out(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

/// Writes an artifact to `--output` if given; returns whether it was written.
fn write_artifact(g: &Global, artifact: &Value) -> Result<bool, CliError> {
    let Some(path) = &g.output else { return Ok(false) };
    fs::write(path, pretty(artifact) + "\n")
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(true)
}

fn config_value(p: &Protocol, c: &Configuration) -> Value {
    to_value(&config_to_map(p, c))
}

fn steps_value(p: &Protocol, steps: &[Transition]) -> Value {
    to_value(&steps.iter().map(|t| transition_to_file(p, t)).collect::<Vec<_>>())
}

fn multiset_value(p: &Protocol, pi: &TransitionMultiset) -> Value {
    let entries: Vec<Value> = p
        .transitions()
        .iter()
        .zip(pi.counts())
        .filter(|(_, k)| **k != BigUint::ZERO)
        .map(|(t, k)| json!([transition_to_file(p, t), dec(k)]))
        .collect();
    Value::Array(entries)
}

fn parse_config(p: &Protocol, text: &str) -> Result<Configuration, CliError> {
    let mut c = Configuration::zero(p.num_states());
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, count) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected `state=count`, found `{part}`")))?;
        let q = p.state_id(name.trim()).ok_or_else(|| CliError::Usage(format!("unknown state `{name}`")))?;
        let k: BigUint = count.trim().parse().map_err(|_| CliError::Usage(format!("bad count `{count}`")))?;
        c.add_to(q, &k);
    }
    Ok(c)
}

// ---------- subcommands ----------

fn random_protocol(n: usize, seed: u64) -> Result<Protocol, CliError> {
    if n == 0 || n > 16 {
        return Err(CliError::Usage("--states must lie in 1..=16".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transitions = Vec::new();
    for a in 0..n {
        for b in a..n {
            transitions.push(Transition::new(a, b, rng.random_range(0..n), rng.random_range(0..n)));
        }
    }
    let names = (0..n).map(|q| format!("q{q}")).collect();
    let outputs = (0..n).map(|_| rng.random_bool(0.5)).collect();
    Ok(Protocol::leaderless(names, transitions, 0, outputs)?)
}

fn gen(g: &Global, a: &GenArgs) -> Outcome {
    let p = match a.kind {
        GenKind::FlockUnary => flock_unary(a.k.unwrap_or_default())?,
        GenKind::FlockBinary => flock_binary(a.k.unwrap_or_default())?,
        GenKind::Random => random_protocol(a.states, a.seed)?,
    };
    let file = to_value(&protocol_to_file(&p));
    if write_artifact(g, &file)? {
        let summary = json!({ "states": dec(p.num_states()), "transitions": dec(p.transitions().len()) });
        emit(g, summary, || format!("{} states, {} transitions", p.num_states(), p.transitions().len()));
    } else {
        out(&pretty(&file));
    }
    Ok(0)
}

fn verify(g: &Global, a: &VerifyArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let verdict = verify_threshold(&p, a.eta, a.max_input, &g.limits()?)?;
    let base = json!({ "eta": dec(a.eta), "max_input": dec(a.max_input) });
    match verdict {
        Verdict::Accept => {
            let mut v = base;
            v["result"] = json!("accept");
            emit(g, v, || format!("accept: computes x ≥ {} on inputs 2..={}", a.eta, a.max_input));
            Ok(0)
        }
        Verdict::Reject(c) => {
            let mut v = base;
            v["result"] = json!("reject");
            v["counterexample"] = json!({
                "input": dec(c.input),
                "configuration": config_value(&p, &c.configuration),
                "expected": u8::from(c.expected),
            });
            emit(g, v, || {
                format!(
                    "reject: on input {} the reachable configuration {} cannot reach a {}-stable configuration",
                    c.input,
                    p.show(&c.configuration),
                    u8::from(c.expected)
                )
            });
            Ok(1)
        }
    }
}

fn reach(g: &Global, a: &ReachArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let start = match (&a.input, &a.config) {
        (Some(i), _) => p.input_config(&BigUint::from(*i)),
        (None, Some(text)) => parse_config(&p, text)?,
        (None, None) => unreachable!("clap requires one of --input and --config"),
    };
    let graph = ReachGraph::explore(&p, &start, &g.limits()?)?;
    if graph.is_truncated() {
        let v = json!({ "partial": true, "nodes": dec(graph.len()), "start": config_value(&p, &start) });
        emit(g, v, || format!("partial: stopped after {} configurations", graph.len()));
        return Ok(3);
    }
    let zero = graph.stable_mask(&p, false);
    let one = graph.stable_mask(&p, true);
    let value = if graph.can_reach(&one).iter().all(|&r| r) {
        "1"
    } else if graph.can_reach(&zero).iter().all(|&r| r) {
        "0"
    } else {
        "undefined"
    };
    let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
    let v = json!({
        "partial": false,
        "start": config_value(&p, &start),
        "nodes": dec(graph.len()),
        "stable_0": dec(count(&zero)),
        "stable_1": dec(count(&one)),
        "value": value,
    });
    emit(g, v, || {
        format!(
            "{} reachable configurations from {}\n0-stable: {}\n1-stable: {}\nvalue: {value}",
            graph.len(),
            p.show(&start),
            count(&zero),
            count(&one)
        )
    });
    Ok(0)
}

fn stable_basis(g: &Global, a: &StableBasisArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let polarity = match a.polarity {
        PolarityArg::S0 => Polarity::S0,
        PolarityArg::S1 => Polarity::S1,
        PolarityArg::S => Polarity::S,
    };
    let d = stable_set_ideals(&p, polarity, &g.limits()?)?;
    let file = to_value(&decomposition_to_file(&p, &d));
    let written = write_artifact(g, &file)?;
    let mut v = json!({ "ideals": dec(d.ideals.len()), "norm": dec(d.norm()) });
    if !written {
        v["decomposition"] = file;
    }
    emit(g, v, || {
        let mut lines = vec![format!("{} ideals, largest bound norm {}", d.ideals.len(), d.norm())];
        lines.extend(d.ideals.iter().map(|i| describe(&p, i)));
        lines.join("\n")
    });
    Ok(0)
}

fn pottier(g: &Global, a: &PottierArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let basis = realisable_basis(&p, a.formula.into(), &g.limits()?)?;
    let elements: Vec<Value> = basis
        .elements
        .iter()
        .map(|e| json!({ "pi": multiset_value(&p, &e.pi), "input": dec(e.input), "result": config_value(&p, &e.result) }))
        .collect();
    let v = json!({
        "xi": dec(&basis.xi),
        "working_xi": dec(basis.working_xi),
        "pottier_bound": dec(pottier_bound(&basis.system)),
        "elements": elements,
    });
    emit(g, v, || {
        let mut lines = vec![format!(
            "{} basis elements; ξ = {}, largest element bound {}",
            basis.elements.len(),
            basis.xi,
            basis.working_xi
        )];
        for e in &basis.elements {
            let pi: Vec<String> = p
                .transitions()
                .iter()
                .zip(e.pi.counts())
                .filter(|(_, k)| **k != BigUint::ZERO)
                .map(|(t, k)| format!("{k}·({})", p.show_transition(t)))
                .collect();
            lines.push(format!("i = {}: {} ⇒ {}", e.input, pi.join(" + "), p.show(&e.result)));
        }
        lines.join("\n")
    });
    Ok(0)
}

fn saturate(g: &Global, a: &SaturateArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let s = saturation_sequence(&p)?;
    let v = json!({
        "j": dec(s.j),
        "length": dec(s.sigma.len()),
        "sigma": steps_value(&p, &s.sigma),
        "result": config_value(&p, &s.result),
    });
    emit(g, v, || {
        let sigma: Vec<String> = s.sigma.iter().map(|t| p.show_transition(t)).collect();
        format!(
            "IC(3^{}) reaches {} in {} steps\n{}",
            s.j,
            p.show(&s.result),
            s.sigma.len(),
            sigma.join("\n")
        )
    });
    Ok(0)
}

fn certify(g: &Global, a: &CertifyArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let limits = g.limits()?;
    let (cert, extra) = match a.variant {
        VariantArg::Leaderless => {
            let opts = LeaderlessOptions { formula: a.formula.into(), max_scale: a.max_scale, max_a: None };
            let build = build_leaderless_certificate(&p, &opts, &limits)?;
            let extra = json!({
                "scale": dec(build.scale),
                "guaranteed_scale": dec(&build.guaranteed_scale),
                "working_xi": dec(build.working_xi),
                "working_norm": dec(&build.working_norm),
                "saturation_rounds": dec(build.saturation.j),
            });
            (build.certificate, extra)
        }
        VariantArg::WithLeaders => match pump_search_leaders(&p, a.i_max, &limits)? {
            Some(c) => (c, json!({ "i_max": dec(a.i_max) })),
            None => {
                let v = json!({ "result": "not_found", "i_max": dec(a.i_max) });
                emit(g, v, || format!("no pumping pair in the stabilization chain up to {}", a.i_max));
                return Ok(1);
            }
        },
    };
    let file = to_value(&certificate_to_file(&p, &cert));
    let written = write_artifact(g, &file)?;
    let mut v = json!({ "result": "found", "a": dec(&cert.a), "b": dec(&cert.b), "details": extra });
    if !written {
        v["certificate"] = file;
    }
    emit(g, v, || {
        let free: Vec<&str> = cert.free.iter().map(|&q| p.state_name(q)).collect();
        format!(
            "any threshold x ≥ η computed by this protocol has η ≤ {}\npump b = {}, free states {{{}}}, E = {}",
            cert.a,
            cert.b,
            free.join(","),
            p.show(&cert.e)
        )
    });
    Ok(0)
}

fn check(g: &Global, a: &CheckArgs) -> Outcome {
    let p = load(&a.protocol)?;
    let cert = parse_certificate(&p, &read(&a.cert)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.cert.display())))?;
    match check_certificate(&p, &cert, &g.limits()?)? {
        CheckOutcome::Accepted { output } => {
            let v = json!({ "result": "accepted", "a": dec(&cert.a), "output": u8::from(output) });
            emit(g, v, || format!("accepted: any threshold the protocol computes is at most {}", cert.a));
            Ok(0)
        }
        CheckOutcome::Rejected(violation) => {
            let v = json!({ "result": "rejected", "condition": violation.condition(), "reason": violation.to_string() });
            emit(g, v, || format!("rejected [{}]: {violation}", violation.condition()));
            Ok(1)
        }
    }
}

fn pow2_value(x: &ScaledPow2) -> Value {
    json!({ "mantissa": dec(&x.mantissa), "exponent": dec(&x.exponent) })
}

fn constants(g: &Global, a: &ConstantsArgs) -> Outcome {
    let c: Constants = match (&a.protocol, a.n) {
        (Some(path), _) => {
            let p = load(&ProtocolArg { protocol: path.clone(), strip_uncoverable: false })?;
            theoretical_constants(&p, a.formula.into())?
        }
        (None, Some(n)) => {
            if n == 0 || n > 12 {
                return Err(CliError::Usage("-n must lie in 1..=12".into()));
            }
            let t = a.transitions.unwrap_or_else(|| max_transitions(n));
            constants_for(n, t, general_xi(n, t))
        }
        (None, None) => unreachable!("clap requires -n or --protocol"),
    };
    let v = json!({
        "n": dec(c.n),
        "transitions": dec(c.transitions),
        "xi": dec(&c.xi),
        "beta": pow2_value(&c.beta),
        "theta": pow2_value(&c.theta),
        "final_bound": pow2_value(&c.final_bound),
        "final_bound_holds": c.final_bound_holds(),
    });
    emit(g, v, || {
        format!(
            "n = {}, |T| = {}\nξ = {}\nβ = {}\nϑ = {}\nξ·n·β·3^n = {}\nξ·n·β·3^n ≤ ϑ: {}",
            c.n,
            c.transitions,
            c.xi,
            c.beta,
            c.theta,
            c.final_bound,
            c.final_bound_holds()
        )
    });
    Ok(0)
}

fn compact(p: &Protocol) -> Value {
    let ts: Vec<String> = p
        .transitions()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| transition_to_file(p, t).join(" "))
        .collect();
    let outputs: BTreeMap<&str, u8> = (0..p.num_states()).map(|q| (p.state_name(q), u8::from(p.output(q)))).collect();
    json!({ "transitions": ts, "output": outputs })
}

fn busybeaver(g: &Global, a: &BusyBeaverArgs) -> Outcome {
    let opts = BBOptions {
        deterministic: !a.nondeterministic,
        classify: ClassifyOptions { cutoff: a.cutoff, formula: a.formula.into() },
    };
    let report = busy_beaver_search(a.n, &opts, &g.limits()?).map_err(|e| match e {
        popproto::bb::BBError::Enumeration(e) => CliError::from(e),
        other => CliError::Internal(other.to_string()),
    })?;
    let labels = ["threshold", "non-threshold", "does-not-compute", "undecided"];
    let counts: BTreeMap<&str, Value> = labels.iter().map(|&l| (l, dec(report.count(l)))).collect();
    let best = report.best.as_ref().map(|(p, eta)| json!({ "eta": dec(eta), "protocol": to_value(&protocol_to_file(p)) }));
    let mut v = json!({
        "n": dec(report.n),
        "deterministic": report.deterministic,
        "cutoff": dec(report.cutoff),
        "protocols": dec(report.entries.len()),
        "counts": counts,
        "best": best,
        "partial": report.partial,
    });
    if a.table {
        let entries: Vec<Value> = report
            .entries
            .iter()
            .enumerate()
            .map(|(i, (p, c))| {
                let mut e = json!({ "index": dec(i), "verdict": c.label(), "protocol": compact(p) });
                match c {
                    Classification::ComputesThreshold { eta, certified } => {
                        e["eta"] = dec(eta);
                        e["certified"] = dec(certified);
                    }
                    Classification::ComputesNonThreshold { reason } | Classification::Undecided { reason } => {
                        e["reason"] = json!(reason);
                    }
                    Classification::DoesNotCompute { input } => e["input"] = dec(input),
                }
                e
            })
            .collect();
        v["entries"] = Value::Array(entries);
    }
    emit(g, v, || {
        let mut lines = vec![format!(
            "{} {}deterministic {}-state protocols, inputs up to {}{}",
            report.entries.len(),
            if report.deterministic { "" } else { "non-" },
            report.n,
            report.cutoff,
            if report.partial { " (partial: timeout)" } else { "" }
        )];
        lines.push(format!("{:<18} {:>8}", "verdict", "count"));
        for l in labels {
            lines.push(format!("{l:<18} {:>8}", report.count(l)));
        }
        match &report.best {
            Some((p, eta)) => {
                lines.push(format!("best: x ≥ {eta}"));
                let ts: Vec<String> =
                    p.transitions().iter().filter(|t| !t.is_identity()).map(|t| p.show_transition(t)).collect();
                lines.push(format!("  transitions: {}", ts.join("; ")));
                let ones: Vec<&str> = (0..p.num_states()).filter(|&q| p.output(q)).map(|q| p.state_name(q)).collect();
                lines.push(format!("  output 1 in: {{{}}}", ones.join(",")));
            }
            None => lines.push("best: none".into()),
        }
        lines.join("\n")
    });
    Ok(if report.partial { 3 } else { 0 })
}
