//! On-disk JSON instance format.
//!
//! ```json
//! { "budget": 15, "epsilon": 0.01,
//!   "candidates": [{"id": "c1", "size": 1}],
//!   "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"c1": 2}}}] }
//! ```
//!
//! Map-valued fields keep file order so that a load/serialize cycle is exact.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub candidates: Vec<CandidateEntry>,
    pub voters: Vec<VoterEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateEntry {
    pub id: String,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoterEntry {
    pub id: String,
    pub utility: UtilityEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UtilityEntry {
    Additive {
        weights: IndexMap<String, f64>,
    },
    Coverage {
        universe_weights: IndexMap<String, f64>,
        covers: IndexMap<String, Vec<String>>,
    },
    GadgetGeneral {
        favorite: Vec<String>,
        second: Vec<String>,
        alpha_lb: f64,
    },
    GadgetSubmodular {
        favorite: Vec<String>,
        second: Vec<String>,
        z: f64,
    },
}

impl InstanceFile {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance file serializes")
    }
}
