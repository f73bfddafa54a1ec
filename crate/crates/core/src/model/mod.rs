//! Instances, voters, normalization and the small/large candidate split.

mod file;
mod oracle;

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use log::warn;

pub use file::{CandidateEntry, InstanceFile, UtilityEntry, VoterEntry};
pub use oracle::{gadget_value, GadgetKind, UtilityOracle};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::CandidateSet;

/// Default approximation slack when the file does not specify one.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<S> {
    pub id: String,
    pub size: S,
}

/// A voter and its utility oracle. Values reported by [`Voter::evaluate`] are
/// normalized so that the best single candidate is worth 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Voter<S> {
    pub id: String,
    pub oracle: UtilityOracle<S>,
    /// `max_j u({j})`, or 1 when every singleton is worthless (possible only
    /// for non-submodular oracles).
    pub u_max: S,
}

impl<S: Scalar> Voter<S> {
    pub fn new(id: impl Into<String>, oracle: UtilityOracle<S>, m: usize) -> Self {
        let best = oracle.max_singleton(m);
        let u_max = if best > S::zero() { best } else { S::one() };
        Self {
            id: id.into(),
            oracle,
            u_max,
        }
    }

    /// Normalized utility `u(T) / u_max`.
    #[inline]
    pub fn evaluate(&self, t: &CandidateSet) -> S {
        self.oracle.value(t) / self.u_max
    }

    /// Oracle rescaled so its own normalizer is 1, when the payload allows it.
    pub fn normalized_oracle(&self) -> Option<UtilityOracle<S>> {
        self.oracle.scaled(S::one() / self.u_max)
    }
}

/// `C_s` (sizes at most `epsilon * b / m`) and its complement `C_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePartition {
    pub small: CandidateSet,
    pub large: CandidateSet,
}

#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub candidates: Vec<Candidate<S>>,
    pub budget: S,
    pub epsilon: S,
    pub voters: Vec<Voter<S>>,
    /// Ids removed during preprocessing (oversized candidates).
    pub dropped_candidates: Vec<String>,
    /// Voters with `u(C) = 0`, removed during preprocessing.
    pub dropped_voters: Vec<String>,
    index: HashMap<String, usize>,
}

impl<S: Scalar> Instance<S> {
    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    pub fn sizes(&self) -> Vec<S> {
        self.candidates.iter().map(|c| c.size).collect()
    }

    pub fn size(&self, j: usize) -> S {
        self.candidates[j].size
    }

    pub fn cost(&self, t: &CandidateSet) -> S {
        t.iter()
            .fold(S::zero(), |acc, j| acc + self.candidates[j].size)
    }

    pub fn total_size(&self) -> S {
        self.candidates
            .iter()
            .fold(S::zero(), |acc, c| acc + c.size)
    }

    /// True when every candidate fits in the budget at once.
    pub fn fits_entirely(&self) -> bool {
        self.total_size() <= self.budget
    }

    pub fn candidate_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownCandidate(id.to_string()))
    }

    pub fn set_from_ids<I, T>(&self, ids: I) -> Result<CandidateSet>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut s = CandidateSet::empty(self.m());
        for id in ids {
            s.insert(self.candidate_index(id.as_ref())?);
        }
        Ok(s)
    }

    pub fn ids_of(&self, t: &CandidateSet) -> Vec<String> {
        t.iter().map(|j| self.candidates[j].id.clone()).collect()
    }

    /// Normalized utility of voter `voter` for the committee named by `ids`.
    pub fn evaluate_ids<T: AsRef<str>>(&self, voter: usize, ids: &[T]) -> Result<S> {
        let t = self.set_from_ids(ids)?;
        Ok(self.voters[voter].evaluate(&t))
    }

    pub fn partition(&self) -> CandidatePartition {
        let m = self.m();
        let threshold = self.epsilon * self.budget / S::lit(m as f64);
        let mut small = CandidateSet::empty(m);
        let mut large = CandidateSet::empty(m);
        for (j, c) in self.candidates.iter().enumerate() {
            if c.size <= threshold {
                small.insert(j);
            } else {
                large.insert(j);
            }
        }
        CandidatePartition { small, large }
    }

    pub fn all_additive(&self) -> bool {
        self.voters.iter().all(|v| v.oracle.is_additive())
    }

    /// Validates and preprocesses a parsed instance file.
    pub fn from_file(def: &InstanceFile) -> Result<Self> {
        let budget = finite_positive(def.budget, "budget")?;
        let epsilon = def.epsilon.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon > 0.0 && epsilon < 0.05) {
            return Err(Error::Schema(format!(
                "epsilon must lie in (0, 1/20), got {epsilon}"
            )));
        }

        let mut declared = HashMap::new();
        let mut candidates = Vec::new();
        let mut dropped_candidates = Vec::new();
        for c in &def.candidates {
            if !(c.size.is_finite() && c.size > 0.0) {
                return Err(Error::NonPositiveSize {
                    id: c.id.clone(),
                    size: c.size,
                });
            }
            if declared.insert(c.id.clone(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate candidate id `{}`", c.id)));
            }
            if c.size > budget {
                warn!(
                    "dropping candidate `{}`: size {} exceeds budget {}",
                    c.id, c.size, budget
                );
                dropped_candidates.push(c.id.clone());
                continue;
            }
            candidates.push(Candidate {
                id: c.id.clone(),
                size: S::lit(c.size),
            });
        }
        if candidates.is_empty() {
            return Err(Error::NoCandidates);
        }
        let index: HashMap<String, usize> = candidates
            .iter()
            .enumerate()
            .map(|(j, c)| (c.id.clone(), j))
            .collect();
        let m = candidates.len();

        // Resolves a candidate id: Some(index), None if dropped, error if undeclared.
        let resolve = |id: &str| -> Result<Option<usize>> {
            if let Some(&j) = index.get(id) {
                Ok(Some(j))
            } else if declared.contains_key(id) {
                Ok(None)
            } else {
                Err(Error::UnknownCandidate(id.to_string()))
            }
        };
        let gadget_set = |ids: &[String], who: &str| -> Result<CandidateSet> {
            let mut s = CandidateSet::empty(m);
            for id in ids {
                if let Some(j) = resolve(id)? {
                    s.insert(j);
                }
            }
            if s.is_empty() {
                return Err(Error::Schema(format!("voter `{who}` has an empty gadget")));
            }
            Ok(s)
        };

        let mut voter_ids = HashMap::new();
        let mut voters = Vec::new();
        let mut dropped_voters = Vec::new();
        for v in &def.voters {
            if voter_ids.insert(v.id.clone(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate voter id `{}`", v.id)));
            }
            let oracle = match &v.utility {
                UtilityEntry::Additive { weights } => {
                    let mut w = vec![S::zero(); m];
                    for (id, &value) in weights {
                        let value = finite_nonneg(value, "additive weight")?;
                        if let Some(j) = resolve(id)? {
                            w[j] = S::lit(value);
                        }
                    }
                    UtilityOracle::Additive { weights: w }
                }
                UtilityEntry::Coverage {
                    universe_weights,
                    covers,
                } => {
                    let elements: Vec<String> = universe_weights.keys().cloned().collect();
                    let element_index: HashMap<&str, usize> = elements
                        .iter()
                        .enumerate()
                        .map(|(e, name)| (name.as_str(), e))
                        .collect();
                    let element_weights = universe_weights
                        .values()
                        .map(|&w| finite_nonneg(w, "universe weight").map(S::lit))
                        .collect::<Result<Vec<S>>>()?;
                    let mut cover_sets = vec![CandidateSet::empty(elements.len()); m];
                    for (id, elems) in covers {
                        let Some(j) = resolve(id)? else { continue };
                        for e in elems {
                            let &ei = element_index.get(e.as_str()).ok_or_else(|| {
                                Error::Schema(format!(
                                    "voter `{}` covers unknown element `{e}`",
                                    v.id
                                ))
                            })?;
                            cover_sets[j].insert(ei);
                        }
                    }
                    UtilityOracle::Coverage {
                        elements,
                        element_weights,
                        covers: cover_sets,
                    }
                }
                UtilityEntry::GadgetGeneral {
                    favorite,
                    second,
                    alpha_lb,
                } => {
                    let alpha_lb = finite_positive(*alpha_lb, "alpha_lb")?;
                    let (favorite, second) =
                        (gadget_set(favorite, &v.id)?, gadget_set(second, &v.id)?);
                    check_disjoint(&favorite, &second, &v.id)?;
                    UtilityOracle::GadgetGeneral {
                        favorite,
                        second,
                        alpha_lb: S::lit(alpha_lb),
                    }
                }
                UtilityEntry::GadgetSubmodular {
                    favorite,
                    second,
                    z,
                } => {
                    if !(z.is_finite() && *z >= 0.0 && *z <= 1.0) {
                        return Err(Error::Schema(format!("z must lie in [0, 1], got {z}")));
                    }
                    let (favorite, second) =
                        (gadget_set(favorite, &v.id)?, gadget_set(second, &v.id)?);
                    check_disjoint(&favorite, &second, &v.id)?;
                    UtilityOracle::GadgetSubmodular {
                        favorite,
                        second,
                        z: S::lit(*z),
                    }
                }
            };
            if oracle.value(&CandidateSet::full(m)) <= S::zero() {
                dropped_voters.push(v.id.clone());
                continue;
            }
            voters.push(Voter::new(v.id.clone(), oracle, m));
        }
        if voters.is_empty() {
            return Err(Error::NoVoters);
        }

        Ok(Self {
            candidates,
            budget: S::lit(budget),
            epsilon: S::lit(epsilon),
            voters,
            dropped_candidates,
            dropped_voters,
            index,
        })
    }

    /// Serializes back to the file format (raw, unnormalized utilities).
    pub fn to_file(&self) -> InstanceFile {
        let ids: Vec<&str> = self.candidates.iter().map(|c| c.id.as_str()).collect();
        let list = |s: &CandidateSet| s.iter().map(|j| ids[j].to_string()).collect::<Vec<_>>();
        let voters = self
            .voters
            .iter()
            .map(|v| {
                let utility = match &v.oracle {
                    UtilityOracle::Additive { weights } => UtilityEntry::Additive {
                        weights: ids
                            .iter()
                            .zip(weights)
                            .map(|(id, w)| (id.to_string(), w.as_f64()))
                            .collect(),
                    },
                    UtilityOracle::Coverage {
                        elements,
                        element_weights,
                        covers,
                    } => UtilityEntry::Coverage {
                        universe_weights: elements
                            .iter()
                            .zip(element_weights)
                            .map(|(e, w)| (e.clone(), w.as_f64()))
                            .collect(),
                        covers: ids
                            .iter()
                            .zip(covers)
                            .map(|(id, c)| {
                                (
                                    id.to_string(),
                                    c.iter().map(|e| elements[e].clone()).collect(),
                                )
                            })
                            .collect::<IndexMap<_, _>>(),
                    },
                    UtilityOracle::GadgetGeneral {
                        favorite,
                        second,
                        alpha_lb,
                    } => UtilityEntry::GadgetGeneral {
                        favorite: list(favorite),
                        second: list(second),
                        alpha_lb: alpha_lb.as_f64(),
                    },
                    UtilityOracle::GadgetSubmodular {
                        favorite,
                        second,
                        z,
                    } => UtilityEntry::GadgetSubmodular {
                        favorite: list(favorite),
                        second: list(second),
                        z: z.as_f64(),
                    },
                };
                VoterEntry {
                    id: v.id.clone(),
                    utility,
                }
            })
            .collect();
        InstanceFile {
            budget: self.budget.as_f64(),
            epsilon: Some(self.epsilon.as_f64()),
            candidates: self
                .candidates
                .iter()
                .map(|c| CandidateEntry {
                    id: c.id.clone(),
                    size: c.size.as_f64(),
                })
                .collect(),
            voters,
        }
    }
}

fn finite_positive(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Schema(format!("{what} must be positive, got {v}")))
    }
}

fn finite_nonneg(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Schema(format!(
            "{what} must be non-negative, got {v}"
        )))
    }
}

fn check_disjoint(a: &CandidateSet, b: &CandidateSet, who: &str) -> Result<()> {
    if a.is_disjoint(b) {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "voter `{who}` has overlapping favorite and second gadgets"
        )))
    }
}

pub fn parse_instance<S: Scalar>(json: &str) -> Result<Instance<S>> {
    let def: InstanceFile = serde_json::from_str(json)?;
    Instance::from_file(&def)
}

pub fn load_instance<S: Scalar>(path: impl AsRef<Path>) -> Result<Instance<S>> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"budget": 1, "candidates": [{"id": "c1", "size": 1}, {"id": "c2", "size": 1}],
        "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"c1": 1, "c2": 1}}}]}"#;

    #[test]
    fn minimal_instance() {
        let inst: Instance<f64> = parse_instance(MINIMAL).unwrap();
        assert_eq!((inst.n(), inst.m()), (1, 2));
        assert_eq!(inst.epsilon, DEFAULT_EPSILON);
        assert!(!inst.fits_entirely());
    }

    #[test]
    fn zero_voter_is_filtered() {
        let json = r#"{"budget": 1, "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}],
            "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"a": 1}}},
                       {"id": "v2", "utility": {"type": "additive", "weights": {"a": 0, "b": 0}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.dropped_voters, vec!["v2".to_string()]);
    }

    #[test]
    fn all_voters_filtered_is_an_error() {
        let json = r#"{"budget": 1, "candidates": [{"id": "a", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"a": 0}}}]}"#;
        assert!(matches!(parse_instance::<f64>(json), Err(Error::NoVoters)));
    }

    #[test]
    fn oversized_candidate_dropped() {
        let json = r#"{"budget": 2, "candidates": [{"id": "a", "size": 1}, {"id": "huge", "size": 3}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"a": 1, "huge": 5}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.dropped_candidates, vec!["huge".to_string()]);
        assert_eq!(inst.voters[0].u_max, 1.0);
    }

    #[test]
    fn schema_errors() {
        let bad_size = r#"{"budget": 1, "candidates": [{"id": "a", "size": 0}], "voters": []}"#;
        assert!(matches!(
            parse_instance::<f64>(bad_size),
            Err(Error::NonPositiveSize { .. })
        ));
        let unknown = r#"{"budget": 1, "candidates": [{"id": "a", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"zz": 1}}}]}"#;
        assert!(matches!(
            parse_instance::<f64>(unknown),
            Err(Error::UnknownCandidate(_))
        ));
        let bad_type = r#"{"budget": 1, "candidates": [{"id": "a", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "approval", "weights": {}}}]}"#;
        assert!(matches!(
            parse_instance::<f64>(bad_type),
            Err(Error::Parse(_))
        ));
        let bad_eps = r#"{"budget": 1, "epsilon": 0.2, "candidates": [{"id": "a", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"a": 1}}}]}"#;
        assert!(matches!(
            parse_instance::<f64>(bad_eps),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            parse_instance::<f64>("{not json"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn evaluate_normalizes_by_best_singleton() {
        let json = r#"{"budget": 1, "candidates": [{"id": "c1", "size": 1}, {"id": "c2", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"c1": 3, "c2": 1}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        assert_eq!(inst.evaluate_ids(0, &["c1"]).unwrap(), 1.0);
        assert!(matches!(
            inst.evaluate_ids(0, &["nope"]),
            Err(Error::UnknownCandidate(_))
        ));
    }

    #[test]
    fn coverage_empty_committee_is_zero() {
        let json = r#"{"budget": 1, "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "coverage",
                "universe_weights": {"e1": 1, "e2": 2}, "covers": {"a": ["e1"], "b": ["e1", "e2"]}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        let none: [&str; 0] = [];
        assert_eq!(inst.evaluate_ids(0, &none).unwrap(), 0.0);
        assert_eq!(inst.evaluate_ids(0, &["b"]).unwrap(), 1.0);
    }

    #[test]
    fn partition_threshold() {
        let json = r#"{"budget": 10, "epsilon": 0.01,
            "candidates": [{"id": "c1", "size": 0.0005}, {"id": "c2", "size": 1}, {"id": "c3", "size": 2}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"c2": 1}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        let p = inst.partition();
        assert_eq!(p.small.iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(p.large.iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn partition_all_large_and_single_candidate() {
        let mut def = InstanceFile {
            budget: 10.0,
            epsilon: Some(0.01),
            candidates: (0..10)
                .map(|j| CandidateEntry {
                    id: format!("c{j}"),
                    size: 1.0,
                })
                .collect(),
            voters: vec![VoterEntry {
                id: "v".into(),
                utility: UtilityEntry::Additive {
                    weights: [("c0".to_string(), 1.0)].into_iter().collect(),
                },
            }],
        };
        let inst = Instance::<f64>::from_file(&def).unwrap();
        assert!(inst.partition().small.is_empty());

        def.candidates.truncate(1);
        def.candidates[0].size = 10.0;
        let inst = Instance::<f64>::from_file(&def).unwrap();
        assert_eq!(inst.partition().large.iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn f32_instances_load() {
        let inst: Instance<f32> = parse_instance(MINIMAL).unwrap();
        assert_eq!(inst.budget, 1.0f32);
    }
}
