//! Committee files: a JSON list of candidate ids, a solve report (its
//! `committee` field), or `{"x": {id: value}}` for a fractional allocation.

use std::path::Path;

use alphacore::{CandidateSet, InstanceF64};
use serde_json::Value;

use crate::output::Failure;

pub enum CommitteeInput {
    Integral(CandidateSet),
    Fractional(Vec<f64>),
}

impl CommitteeInput {
    /// The allocation as a vector in `[0, 1]^m`.
    pub fn as_vector(&self, m: usize) -> Vec<f64> {
        match self {
            CommitteeInput::Integral(s) => (0..m)
                .map(|j| if s.contains(j) { 1.0 } else { 0.0 })
                .collect(),
            CommitteeInput::Fractional(x) => x.clone(),
        }
    }
}

fn ids(inst: &InstanceF64, list: &[Value]) -> Result<CandidateSet, Failure> {
    let names = list
        .iter()
        .map(|v| {
            v.as_str().map(str::to_owned).ok_or_else(|| {
                Failure::usage(format!("committee entries must be candidate ids, got {v}"))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(inst.set_from_ids(&names)?)
}

pub fn load(inst: &InstanceF64, path: &Path) -> Result<CommitteeInput, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    from_str(inst, &text)
}

pub fn from_str(inst: &InstanceF64, text: &str) -> Result<CommitteeInput, Failure> {
    let value: Value = serde_json::from_str(text)?;
    match &value {
        Value::Array(list) => Ok(CommitteeInput::Integral(ids(inst, list)?)),
        Value::Object(map) => {
            if let Some(Value::Array(list)) = map.get("committee") {
                return Ok(CommitteeInput::Integral(ids(inst, list)?));
            }
            if let Some(Value::Object(x)) = map.get("x") {
                let mut out = vec![0.0; inst.m()];
                for (id, v) in x {
                    let j = inst.candidate_index(id)?;
                    let v = v
                        .as_f64()
                        .filter(|v| (0.0..=1.0).contains(v))
                        .ok_or_else(|| {
                            Failure::usage(format!("x[{id}] must be a number in [0, 1]"))
                        })?;
                    out[j] = v;
                }
                return Ok(CommitteeInput::Fractional(out));
            }
            Err(Failure::usage(
                "committee object needs a `committee` list or an `x` map",
            ))
        }
        _ => Err(Failure::usage(
            "committee file must be a JSON list or object",
        )),
    }
}
