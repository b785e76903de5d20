//! JSON file formats for protocols, configurations and execution witnesses.
//!
//! Protocol file:
//!
//! ```json
//! {
//!   "states": ["0", "1", "2"],
//!   "transitions": [["1", "1", "0", "2"], ["0", "2", "2", "2"]],
//!   "leaders": {},
//!   "input": {"x": "1"},
//!   "output": {"0": 0, "1": 0, "2": 1}
//! }
//! ```
//!
//! Counts are written as decimal strings; plain JSON integers are accepted on
//! input. Configurations are `state → count` maps that omit zero entries.
//! Witnesses are tagged records: `{"steps": [[p,q,p',q'], ...]}`,
//! `{"concat": [...]}` or `{"repeat": {"body", "count", "base", "consume", "produce"}}`.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::{Configuration, ExecutionWitness, ModelError, Protocol, Transition};

/// Big natural number carried as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Count(pub BigUint);

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_str_radix(10))
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match Value::deserialize(d)? {
            Value::String(s) => BigUint::from_str(s.trim()).map(Count).map_err(D::Error::custom),
            Value::Number(n) => n
                .as_u64()
                .map(|v| Count(BigUint::from(v)))
                .ok_or_else(|| D::Error::custom(format!("not a natural number: {n}"))),
            other => Err(D::Error::custom(format!("expected a count, found {other}"))),
        }
    }
}

pub type ConfigMap = BTreeMap<String, Count>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub states: Vec<String>,
    pub transitions: Vec<[String; 4]>,
    #[serde(default)]
    pub leaders: ConfigMap,
    pub input: BTreeMap<String, String>,
    pub output: BTreeMap<String, u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessFile {
    Steps(Vec<[String; 4]>),
    Concat(Vec<WitnessFile>),
    Repeat(Box<RepeatFile>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepeatFile {
    pub body: WitnessFile,
    pub count: Count,
    pub base: ConfigMap,
    pub consume: ConfigMap,
    pub produce: ConfigMap,
}

fn lookup(p: &Protocol, name: &str) -> Result<usize, ModelError> {
    p.state_id(name).ok_or_else(|| ModelError::Format(format!("unknown state `{name}`")))
}

fn lookup_in(states: &[String], name: &str) -> Result<usize, ModelError> {
    states
        .iter()
        .position(|s| s == name)
        .ok_or_else(|| ModelError::Format(format!("unknown state `{name}`")))
}

pub fn transition_to_file(p: &Protocol, t: &Transition) -> [String; 4] {
    [t.pre.first(), t.pre.second(), t.post.first(), t.post.second()].map(|q| p.state_name(q).to_string())
}

pub fn transition_from_file(p: &Protocol, t: &[String; 4]) -> Result<Transition, ModelError> {
    Ok(Transition::new(lookup(p, &t[0])?, lookup(p, &t[1])?, lookup(p, &t[2])?, lookup(p, &t[3])?))
}

pub fn config_to_map(p: &Protocol, c: &Configuration) -> ConfigMap {
    (0..p.num_states())
        .filter(|&q| !c.get(q).is_zero())
        .map(|q| (p.state_name(q).to_string(), Count(c.get(q).clone())))
        .collect()
}

pub fn config_from_map(p: &Protocol, m: &ConfigMap) -> Result<Configuration, ModelError> {
    let mut c = Configuration::zero(p.num_states());
    for (name, count) in m {
        c.add_to(lookup(p, name)?, &count.0);
    }
    Ok(c)
}

pub fn protocol_to_file(p: &Protocol) -> ProtocolFile {
    ProtocolFile {
        states: p.states().to_vec(),
        transitions: p.transitions().iter().map(|t| transition_to_file(p, t)).collect(),
        leaders: config_to_map(p, p.leaders()),
        input: BTreeMap::from([(p.input_var().to_string(), p.state_name(p.input_state()).to_string())]),
        output: (0..p.num_states()).map(|q| (p.state_name(q).to_string(), p.output(q) as u8)).collect(),
    }
}

pub fn protocol_from_file(f: &ProtocolFile) -> Result<Protocol, ModelError> {
    if f.input.len() != 1 {
        return Err(ModelError::Format(format!(
            "exactly one input variable is supported, found {}",
            f.input.len()
        )));
    }
    let (var, input_state) = f.input.iter().next().expect("one entry");
    let input_state = lookup_in(&f.states, input_state)?;
    let mut outputs = vec![None; f.states.len()];
    for (name, &b) in &f.output {
        let q = lookup_in(&f.states, name)?;
        outputs[q] = Some(match b {
            0 => false,
            1 => true,
            _ => return Err(ModelError::Format(format!("output of `{name}` must be 0 or 1"))),
        });
    }
    let outputs = outputs
        .into_iter()
        .enumerate()
        .map(|(q, b)| b.ok_or_else(|| ModelError::Format(format!("no output for state `{}`", f.states[q]))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut leaders = Configuration::zero(f.states.len());
    for (name, count) in &f.leaders {
        leaders.add_to(lookup_in(&f.states, name)?, &count.0);
    }
    let transitions = f
        .transitions
        .iter()
        .map(|t| {
            Ok(Transition::new(
                lookup_in(&f.states, &t[0])?,
                lookup_in(&f.states, &t[1])?,
                lookup_in(&f.states, &t[2])?,
                lookup_in(&f.states, &t[3])?,
            ))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Protocol::new(f.states.clone(), transitions, leaders, var.clone(), input_state, outputs)
}

pub fn parse_protocol(text: &str) -> Result<Protocol, ModelError> {
    let f: ProtocolFile = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
    protocol_from_file(&f)
}

pub fn protocol_to_string(p: &Protocol) -> String {
    serde_json::to_string_pretty(&protocol_to_file(p)).expect("protocol serializes")
}

pub fn witness_to_file(p: &Protocol, w: &ExecutionWitness) -> WitnessFile {
    match w {
        ExecutionWitness::Steps(steps) => WitnessFile::Steps(steps.iter().map(|t| transition_to_file(p, t)).collect()),
        ExecutionWitness::Concat(parts) => WitnessFile::Concat(parts.iter().map(|w| witness_to_file(p, w)).collect()),
        ExecutionWitness::Repeat { body, count, base, consume, produce } => WitnessFile::Repeat(Box::new(RepeatFile {
            body: witness_to_file(p, body),
            count: Count(count.clone()),
            base: config_to_map(p, base),
            consume: config_to_map(p, consume),
            produce: config_to_map(p, produce),
        })),
    }
}

pub fn witness_from_file(p: &Protocol, f: &WitnessFile) -> Result<ExecutionWitness, ModelError> {
    Ok(match f {
        WitnessFile::Steps(steps) => {
            ExecutionWitness::Steps(steps.iter().map(|t| transition_from_file(p, t)).collect::<Result<_, _>>()?)
        }
        WitnessFile::Concat(parts) => {
            ExecutionWitness::Concat(parts.iter().map(|w| witness_from_file(p, w)).collect::<Result<_, _>>()?)
        }
        WitnessFile::Repeat(r) => ExecutionWitness::Repeat {
            body: Box::new(witness_from_file(p, &r.body)?),
            count: r.count.0.clone(),
            base: config_from_map(p, &r.base)?,
            consume: config_from_map(p, &r.consume)?,
            produce: config_from_map(p, &r.produce)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{flock_binary, flock_unary};

    #[test]
    fn protocol_round_trip() {
        for p in [flock_binary(2).unwrap(), flock_unary(2).unwrap()] {
            let text = protocol_to_string(&p);
            assert_eq!(parse_protocol(&text).unwrap(), p);
        }
    }

    #[test]
    fn accepts_numeric_counts_and_reports_unknown_states() {
        let text = r#"{"states":["l","x"],"transitions":[],"leaders":{"l":3},
                       "input":{"x":"x"},"output":{"l":0,"x":1}}"#;
        let p = parse_protocol(text).unwrap();
        assert_eq!(p.leaders(), &Configuration::from_small(&[3, 0]));

        let bad = r#"{"states":["x"],"transitions":[["x","x","y","x"]],
                      "input":{"x":"x"},"output":{"x":1}}"#;
        assert!(matches!(parse_protocol(bad), Err(ModelError::Format(_))));
    }

    #[test]
    fn witness_round_trip() {
        let p = flock_binary(1).unwrap();
        let w = ExecutionWitness::Concat(vec![
            ExecutionWitness::Steps(vec![Transition::new(1, 1, 0, 2)]),
            ExecutionWitness::Repeat {
                body: Box::new(ExecutionWitness::Steps(vec![Transition::new(0, 2, 2, 2)])),
                count: BigUint::from(7u32),
                base: Configuration::from_small(&[0, 0, 1]),
                consume: Configuration::from_small(&[1, 0, 0]),
                produce: Configuration::from_small(&[0, 0, 1]),
            },
        ]);
        let text = serde_json::to_string(&witness_to_file(&p, &w)).unwrap();
        let back: WitnessFile = serde_json::from_str(&text).unwrap();
        assert_eq!(witness_from_file(&p, &back).unwrap(), w);
    }
}
