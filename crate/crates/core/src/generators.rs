//! Instance generators: the two six-voter gadget lower-bound families and
//! seeded random additive and coverage instances.

use std::str::FromStr;

use indexmap::IndexMap;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CandidateEntry, InstanceFile, UtilityEntry, VoterEntry, DEFAULT_EPSILON};
use crate::rng::rng_from_seed;

/// Number of gadgets (and voters) in the lower-bound instances.
pub const LB_GADGETS: usize = 6;
/// Favorite gadget of each voter (1-based).
pub const LB_FAVORITE: [usize; LB_GADGETS] = [1, 2, 3, 4, 5, 6];
/// Second gadget of each voter (1-based).
pub const LB_SECOND: [usize; LB_GADGETS] = [2, 3, 1, 5, 6, 4];
pub const LB_DEFAULT_GADGET_SIZE: usize = 5;

/// `(sqrt(689) - 17) / 10`.
pub fn lb_default_z() -> f64 {
    (689f64.sqrt() - 17.0) / 10.0
}

/// `(5 sqrt(689) - 115) / 16`, the core gap forced by the submodular gadget
/// instance at the default `z`.
pub fn lb_submodular_gap() -> f64 {
    (5.0 * 689f64.sqrt() - 115.0) / 16.0
}

fn gadget_ids(g: usize, size: usize) -> Vec<String> {
    (1..=size).map(|k| format!("g{g}_{k}")).collect()
}

fn lb_instance(
    gadget_size: usize,
    utility: impl Fn(Vec<String>, Vec<String>) -> UtilityEntry,
) -> Result<InstanceFile> {
    if gadget_size == 0 {
        return Err(Error::InvalidParams(
            "gadget size must be at least 1".into(),
        ));
    }
    let candidates = (1..=LB_GADGETS)
        .flat_map(|g| gadget_ids(g, gadget_size))
        .map(|id| CandidateEntry { id, size: 1.0 })
        .collect();
    let voters = (0..LB_GADGETS)
        .map(|i| VoterEntry {
            id: format!("v{}", i + 1),
            utility: utility(
                gadget_ids(LB_FAVORITE[i], gadget_size),
                gadget_ids(LB_SECOND[i], gadget_size),
            ),
        })
        .collect();
    Ok(InstanceFile {
        budget: (LB_GADGETS * gadget_size) as f64 / 2.0,
        epsilon: Some(DEFAULT_EPSILON),
        candidates,
        voters,
    })
}

/// Six cyclic gadget voters with `(alpha_lb + 1) [favorite complete] +
/// [second complete]`; budget covers half the candidates.
pub fn lb_general(alpha_lb: f64, gadget_size: usize) -> Result<InstanceFile> {
    if !(alpha_lb.is_finite() && alpha_lb >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "alpha_lb must be finite and non-negative, got {alpha_lb}"
        )));
    }
    lb_instance(gadget_size, |favorite, second| {
        UtilityEntry::GadgetGeneral {
            favorite,
            second,
            alpha_lb,
        }
    })
}

/// Six cyclic gadget voters with `x + z (1 - x) y`.
pub fn lb_submodular(z: f64, gadget_size: usize) -> Result<InstanceFile> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::InvalidParams(format!(
            "z must lie in (0, 1), got {z}"
        )));
    }
    lb_instance(gadget_size, |favorite, second| {
        UtilityEntry::GadgetSubmodular {
            favorite,
            second,
            z,
        }
    })
}

/// Distribution of additive weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDist {
    /// Uniform on `[0, 1)`.
    Uniform,
    /// Unit-rate exponential.
    Exponential,
    /// Uniform on `[0, 1)` for half the candidates, zero elsewhere.
    Sparse,
}

impl FromStr for WeightDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "exponential" => Ok(Self::Exponential),
            "sparse" => Ok(Self::Sparse),
            other => Err(Error::InvalidParams(format!(
                "unknown weight distribution `{other}`"
            ))),
        }
    }
}

/// Candidate sizes for random families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeDist {
    Unit,
    /// Integer sizes uniform on `1..=max`.
    Integer {
        max: u32,
    },
}

/// Rounds to four decimals so files stay readable.
fn tidy(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

fn candidates(m: usize, sizes: SizeDist, rng: &mut impl Rng) -> Vec<CandidateEntry> {
    (1..=m)
        .map(|j| CandidateEntry {
            id: format!("c{j}"),
            size: match sizes {
                SizeDist::Unit => 1.0,
                SizeDist::Integer { max } => rng.gen_range(1..=max.max(1)) as f64,
            },
        })
        .collect()
}

fn check_dims(n: usize, m: usize, b: f64) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams("n and m must be positive".into()));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParams(format!(
            "budget must be positive, got {b}"
        )));
    }
    Ok(())
}

/// `n` additive voters over `m` candidates. Every voter values at least one
/// candidate.
pub fn random_additive(
    n: usize,
    m: usize,
    b: f64,
    weights: WeightDist,
    sizes: SizeDist,
    seed: u64,
) -> Result<InstanceFile> {
    check_dims(n, m, b)?;
    let mut rng = rng_from_seed(seed);
    let candidates = candidates(m, sizes, &mut rng);
    let voters = (1..=n)
        .map(|i| {
            let mut w: Vec<f64> = (0..m)
                .map(|_| {
                    let u: f64 = rng.gen();
                    tidy(match weights {
                        WeightDist::Uniform => u,
                        WeightDist::Exponential => -(1.0 - u).ln(),
                        WeightDist::Sparse => {
                            if rng.gen_bool(0.5) {
                                u
                            } else {
                                0.0
                            }
                        }
                    })
                })
                .collect();
            if w.iter().all(|&v| v <= 0.0) {
                w[rng.gen_range(0..m)] = 1.0;
            }
            VoterEntry {
                id: format!("v{i}"),
                utility: UtilityEntry::Additive {
                    weights: candidates.iter().map(|c| c.id.clone()).zip(w).collect(),
                },
            }
        })
        .collect();
    Ok(InstanceFile {
        budget: b,
        epsilon: Some(DEFAULT_EPSILON),
        candidates,
        voters,
    })
}

/// `n` coverage voters over a shared cover structure: candidate `j` covers
/// each of `universe` elements with probability `density`, and each voter
/// weights each element uniformly on `[0, 1)` or zero with equal odds.
/// Every voter values at least one covered element.
pub fn random_coverage(
    n: usize,
    m: usize,
    universe: usize,
    density: f64,
    b: f64,
    seed: u64,
) -> Result<InstanceFile> {
    check_dims(n, m, b)?;
    if universe == 0 {
        return Err(Error::InvalidParams("universe must be non-empty".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let candidates = candidates(m, SizeDist::Unit, &mut rng);
    let elems: Vec<String> = (1..=universe).map(|e| format!("e{e}")).collect();
    let mut covers: IndexMap<String, Vec<String>> = IndexMap::new();
    for c in &candidates {
        let mut set: Vec<String> = elems
            .iter()
            .filter(|_| rng.gen_bool(density))
            .cloned()
            .collect();
        if set.is_empty() {
            set.push(elems[rng.gen_range(0..universe)].clone());
        }
        covers.insert(c.id.clone(), set);
    }
    let covered: Vec<usize> = (0..universe)
        .filter(|&e| covers.values().any(|s| s.contains(&elems[e])))
        .collect();
    let voters = (1..=n)
        .map(|i| {
            let mut w: Vec<f64> = (0..universe)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        tidy(rng.gen())
                    } else {
                        0.0
                    }
                })
                .collect();
            if covered.iter().all(|&e| w[e] <= 0.0) {
                w[covered[rng.gen_range(0..covered.len())]] = 1.0;
            }
            VoterEntry {
                id: format!("v{i}"),
                utility: UtilityEntry::Coverage {
                    universe_weights: elems.iter().cloned().zip(w).collect(),
                    covers: covers.clone(),
                },
            }
        })
        .collect();
    Ok(InstanceFile {
        budget: b,
        epsilon: Some(DEFAULT_EPSILON),
        candidates,
        voters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;
    use crate::set::CandidateSet;

    #[test]
    fn submodular_defaults() {
        let f = lb_submodular(lb_default_z(), LB_DEFAULT_GADGET_SIZE).unwrap();
        assert_eq!(
            (f.voters.len(), f.candidates.len(), f.budget),
            (6, 30, 15.0)
        );
        assert!((lb_default_z() - 0.925).abs() < 1e-3);
        assert!(lb_submodular_gap() > 1.015);
        let inst = Instance::<f64>::from_file(&f).unwrap();
        assert_eq!(inst.n(), 6);
        // Voter 1 values its second gadget at z.
        let g2 = inst.set_from_ids(&gadget_ids(2, 5)).unwrap();
        let raw = inst.voters[0].oracle.value(&g2);
        assert!((raw - lb_default_z()).abs() < 1e-15);
    }

    #[test]
    fn scaled_budget() {
        let f = lb_submodular(0.5, 2).unwrap();
        assert_eq!((f.candidates.len(), f.budget), (12, 6.0));
        let f = lb_general(10.0, 1).unwrap();
        assert_eq!(f.budget, 3.0);
        assert!(lb_general(1.0, 0).is_err());
        assert!(lb_submodular(1.0, 5).is_err());
    }

    #[test]
    fn general_formula() {
        let inst = Instance::<f64>::from_file(&lb_general(1000.0, 5).unwrap()).unwrap();
        let g1 = inst.set_from_ids(&gadget_ids(1, 5)).unwrap();
        let mut both = g1.clone();
        both.union_with(&inst.set_from_ids(&gadget_ids(2, 5)).unwrap());
        assert_eq!(inst.voters[0].oracle.value(&g1), 1001.0);
        assert_eq!(inst.voters[0].oracle.value(&both), 1002.0);
        assert_eq!(inst.voters[0].oracle.value(&CandidateSet::empty(30)), 0.0);
    }

    #[test]
    fn random_families_are_seeded() {
        let a = random_additive(6, 10, 5.0, WeightDist::Uniform, SizeDist::Unit, 1).unwrap();
        let b = random_additive(6, 10, 5.0, WeightDist::Uniform, SizeDist::Unit, 1).unwrap();
        let c = random_additive(6, 10, 5.0, WeightDist::Uniform, SizeDist::Unit, 2).unwrap();
        assert_eq!(a.to_json_pretty(), b.to_json_pretty());
        assert_ne!(a, c);
        for seed in 0..20 {
            let f = random_coverage(4, 8, 6, 0.3, 3.0, seed).unwrap();
            let inst = Instance::<f64>::from_file(&f).unwrap();
            assert_eq!(inst.n(), 4);
            let f = random_additive(
                5,
                6,
                2.0,
                WeightDist::Sparse,
                SizeDist::Integer { max: 2 },
                seed,
            )
            .unwrap();
            assert_eq!(Instance::<f64>::from_file(&f).unwrap().n(), 5);
        }
    }
}
