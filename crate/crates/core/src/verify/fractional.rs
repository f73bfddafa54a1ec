//! Randomized probe for fractional core violations.
//!
//! A coalition `S` of the voters `W` blocks the fractional allocation `x`
//! at level `alpha` with `z` when `sum_j s_j z_j <= |S| B / |W|` and
//! `U_i(z) > alpha U_i(x)` for every `i` in `S`.

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multilinear::Multilinear;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;
use crate::set::CandidateSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalViolation {
    pub voters: Vec<String>,
    pub z: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalCoreReport {
    pub probes: usize,
    /// First violating probe, if any.
    pub violation: Option<FractionalViolation>,
    /// True when every utility was computed exactly.
    pub exact: bool,
}

/// Fills `z` greedily by descending `score_j / s_j` up to `cap`, taking a
/// fractional piece of the first candidate that does not fit.
fn greedy_fill(scores: &[f64], sizes: &[f64], cap: f64) -> Vec<f64> {
    let m = scores.len();
    let mut order: Vec<usize> = (0..m).filter(|&j| scores[j] > 0.0).collect();
    order.sort_by(|&a, &b| {
        (scores[b] / sizes[b])
            .total_cmp(&(scores[a] / sizes[a]))
            .then(a.cmp(&b))
    });
    let mut z = vec![0.0; m];
    let mut left = cap;
    for j in order {
        if left <= 0.0 {
            break;
        }
        z[j] = (left / sizes[j]).min(1.0);
        left -= z[j] * sizes[j];
    }
    z
}

/// Draws `probes` random coalitions of `w` and a greedy fractional
/// deviation for each, reporting the first that beats `alpha U_i(x)` for
/// every member. Sampled utilities must clear the comparison by the
/// estimator accuracy on both sides.
pub fn check_fractional_core<S: Scalar>(
    eval: &Multilinear<'_, S>,
    x: &[S],
    w: &[usize],
    budget: f64,
    alpha: f64,
    probes: usize,
    seed: u64,
) -> Result<FractionalCoreReport> {
    if probes == 0 {
        return Err(Error::InvalidParams("probe count must be positive".into()));
    }
    if w.is_empty() {
        return Err(Error::NoVoters);
    }
    let inst = eval.instance();
    let m = inst.m();
    let sizes: Vec<f64> = inst.sizes().iter().map(|s| s.as_f64()).collect();
    let singletons: Vec<Vec<f64>> = w
        .iter()
        .map(|&i| {
            (0..m)
                .map(|j| {
                    inst.voters[i]
                        .evaluate(&CandidateSet::from_indices(m, [j]))
                        .as_f64()
                })
                .collect()
        })
        .collect();
    let base: Vec<f64> = eval
        .values(w, x, derive_seed(seed, u64::MAX))
        .iter()
        .map(|u| u.as_f64())
        .collect();
    let exact = eval.all_exact(w);
    let margin = if exact { 0.0 } else { eval.config().delta };

    for p in 0..probes {
        let mut rng = rng_from_seed(derive_seed(seed, p as u64));
        let k = rng.gen_range(1..=w.len());
        let members: Vec<usize> = sample(&mut rng, w.len(), k).into_iter().collect();
        let r: Vec<f64> = (0..m).map(|_| rng.gen()).collect();
        let scores: Vec<f64> = (0..m)
            .map(|j| members.iter().map(|&a| singletons[a][j]).sum::<f64>() * r[j])
            .collect();
        let cap = k as f64 / w.len() as f64 * budget;
        let z = greedy_fill(&scores, &sizes, cap);
        let zs: Vec<S> = z.iter().map(|&v| S::lit(v)).collect();
        let voters: Vec<usize> = members.iter().map(|&a| w[a]).collect();
        let gains = eval.values(&voters, &zs, derive_seed(seed, p as u64 ^ (1 << 63)));
        let blocks = members
            .iter()
            .zip(&gains)
            .all(|(&a, g)| g.as_f64() - margin > alpha * (base[a] + margin));
        if blocks {
            let mut ids: Vec<usize> = voters.clone();
            ids.sort_unstable();
            return Ok(FractionalCoreReport {
                probes: p + 1,
                violation: Some(FractionalViolation {
                    voters: ids.iter().map(|&i| inst.voters[i].id.clone()).collect(),
                    cost: z.iter().zip(&sizes).map(|(a, b)| a * b).sum(),
                    z,
                }),
                exact,
            });
        }
    }
    Ok(FractionalCoreReport {
        probes,
        violation: None,
        exact,
    })
}
