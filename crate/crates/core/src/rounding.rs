//! Turning a fractional allocation into an integral committee.
//!
//! The submodular path includes each affordable large candidate
//! independently with probability `min(1, x_j)`; the additive path uses
//! pairwise pipage rounding, which keeps `sum_j s_j x_j` fixed at every step
//! and leaves at most one coordinate fractional. Realizations are accepted
//! once enough voters are `gamma`-satisfied: some `q` in `C` gives
//! `u_i(O + q) >= U_i(x) / gamma`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;
use crate::serde_util::extended_f64;
use crate::set::CandidateSet;

/// Values this close to 0 or 1 are snapped during pipage rounding.
const SNAP: f64 = 1e-12;

/// An integral committee, possibly with one candidate left fractional.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    pub members: CandidateSet,
    /// `(candidate, weight)` for the single fractional coordinate left by
    /// dependent rounding.
    pub fractional_leftover: Option<(usize, f64)>,
}

impl Committee {
    pub fn new(members: CandidateSet) -> Self {
        Self {
            members,
            fractional_leftover: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfactionRecord {
    pub voter: usize,
    pub voter_id: String,
    pub satisfied: bool,
    /// Best single additament `q` (lowest index among ties).
    pub witness_additament: Option<usize>,
    /// `u_i(O + q) / U_i(x)`, infinite when `U_i(x) = 0`.
    #[serde(serialize_with = "extended_f64")]
    pub ratio: f64,
    pub fractional_utility: f64,
    pub committee_utility: f64,
}

/// `(kappa e^{1-kappa})^{1/kappa} + (gamma - 1) e^{2-gamma}`.
pub fn beta_submodular(kappa: f64, gamma: f64) -> f64 {
    (kappa * (1.0 - kappa).exp()).powf(1.0 / kappa) + (gamma - 1.0) * (2.0 - gamma).exp()
}

/// `gamma e^{1-gamma}`.
pub fn beta_additive(gamma: f64) -> f64 {
    gamma * (1.0 - gamma).exp()
}

/// `ceil((1 - beta - eps) |W|)`, never below 0.
pub fn acceptance_threshold(beta: f64, eps: f64, w: usize) -> usize {
    ((1.0 - beta - eps) * w as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Attempts allowed before giving up on a round: `ceil(40 / eps)`.
pub fn attempt_cap(eps: f64) -> usize {
    (40.0 / eps).ceil() as usize
}

/// `max_q u_i(O + q)` over all candidates, with the maximizing `q`.
pub fn best_additament<S: Scalar>(
    inst: &Instance<S>,
    voter: usize,
    o: &CandidateSet,
) -> (S, Option<usize>) {
    let v = &inst.voters[voter];
    let mut best = v.evaluate(o);
    let mut arg = None;
    for q in 0..inst.m() {
        let val = if o.contains(q) {
            v.evaluate(o)
        } else {
            v.evaluate(&o.with(q))
        };
        if arg.is_none() || val > best {
            best = val;
            arg = Some(q);
        }
    }
    (best, arg)
}

/// Satisfaction of each voter in `w` given their fractional utilities
/// `utilities` (same order as `w`).
pub fn gamma_satisfaction<S: Scalar>(
    inst: &Instance<S>,
    w: &[usize],
    utilities: &[S],
    o: &CandidateSet,
    gamma: f64,
) -> Vec<SatisfactionRecord> {
    w.par_iter()
        .zip(utilities)
        .map(|(&i, &u)| {
            let (best, q) = best_additament(inst, i, o);
            let (best, u) = (best.as_f64(), u.as_f64());
            let ratio = if u <= 0.0 { f64::INFINITY } else { best / u };
            SatisfactionRecord {
                voter: i,
                voter_id: inst.voters[i].id.clone(),
                satisfied: u <= 0.0 || best >= u / gamma - 1e-9,
                witness_additament: q,
                ratio,
                fractional_utility: u,
                committee_utility: best,
            }
        })
        .collect()
}

/// Cost of `o` restricted to `restrict`.
pub fn cost_within<S: Scalar>(inst: &Instance<S>, o: &CandidateSet, restrict: &CandidateSet) -> S {
    o.iter()
        .filter(|&j| restrict.contains(j))
        .map(|j| inst.size(j))
        .sum()
}

/// A realization is accepted when its large-candidate cost is at most
/// `budget` and at least `ceil((1 - beta - eps)|W|)` voters are satisfied.
pub fn accept_realization<S: Scalar>(
    inst: &Instance<S>,
    o: &CandidateSet,
    records: &[SatisfactionRecord],
    budget: S,
    beta: f64,
) -> bool {
    let large = inst.partition().large;
    if cost_within(inst, o, &large) > budget + S::tolerance() {
        return false;
    }
    let satisfied = records.iter().filter(|r| r.satisfied).count();
    satisfied >= acceptance_threshold(beta, inst.epsilon.as_f64(), records.len())
}

/// Independent rounding: `C_s` always, each large `j` with `s_j <= kappa B`
/// with probability `min(1, x_j)`, nothing else.
pub fn sample_independent<S: Scalar>(
    inst: &Instance<S>,
    x: &[S],
    kappa_budget: S,
    seed: u64,
) -> Committee {
    let part = inst.partition();
    let mut rng = rng_from_seed(seed);
    let mut members = part.small.clone();
    for j in part.large.iter() {
        let u: f64 = rng.gen();
        if inst.size(j) <= kappa_budget && u < x[j].min(S::one()).as_f64() {
            members.insert(j);
        }
    }
    Committee::new(members)
}

/// One independent-rounding draw and the resulting satisfaction records.
#[allow(clippy::too_many_arguments)]
pub fn round_submodular<S: Scalar>(
    inst: &Instance<S>,
    w: &[usize],
    x: &[S],
    utilities: &[S],
    kappa_budget: S,
    gamma: f64,
    seed: u64,
) -> (Committee, Vec<SatisfactionRecord>) {
    let c = sample_independent(inst, x, kappa_budget, seed);
    let records = gamma_satisfaction(inst, w, utilities, &c.members, gamma);
    (c, records)
}

/// Result of pipage rounding with the cost after every step.
#[derive(Debug, Clone, PartialEq)]
pub struct PipageTrace {
    pub committee: Committee,
    /// Final (possibly one-fractional) vector.
    pub x: Vec<f64>,
    /// `sum_j s_j x_j` before the first step and after each step.
    pub costs: Vec<f64>,
}

/// Pairwise pipage rounding on `x` (clamped to `[0, 1]`).
pub fn round_dependent<S: Scalar>(x: &[S], sizes: &[S], seed: u64) -> Committee {
    round_dependent_traced(x, sizes, seed).committee
}

pub fn round_dependent_traced<S: Scalar>(x: &[S], sizes: &[S], seed: u64) -> PipageTrace {
    let mut rng = rng_from_seed(seed);
    let s: Vec<f64> = sizes.iter().map(|v| v.as_f64()).collect();
    let mut x: Vec<f64> = x.iter().map(|v| snap(v.as_f64().clamp(0.0, 1.0))).collect();
    let cost = |x: &[f64]| x.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
    let mut costs = vec![cost(&x)];
    loop {
        let mut frac = (0..x.len()).filter(|&j| x[j] > 0.0 && x[j] < 1.0);
        let (Some(j), Some(k)) = (frac.next(), frac.next()) else {
            break;
        };
        // Option 1 raises j and lowers k; option 2 does the reverse.
        let a1 = ((1.0 - x[j]) * s[j]).min(x[k] * s[k]);
        let a2 = (x[j] * s[j]).min((1.0 - x[k]) * s[k]);
        let take_first = rng.gen::<f64>() * (a1 + a2) < a2;
        if take_first {
            if (1.0 - x[j]) * s[j] <= x[k] * s[k] {
                x[k] = snap(x[k] - (1.0 - x[j]) * s[j] / s[k]);
                x[j] = 1.0;
            } else {
                x[j] = snap(x[j] + x[k] * s[k] / s[j]);
                x[k] = 0.0;
            }
        } else if x[j] * s[j] <= (1.0 - x[k]) * s[k] {
            x[k] = snap(x[k] + x[j] * s[j] / s[k]);
            x[j] = 0.0;
        } else {
            x[j] = snap(x[j] - (1.0 - x[k]) * s[k] / s[j]);
            x[k] = 1.0;
        }
        costs.push(cost(&x));
    }
    let members = CandidateSet::from_indices(x.len(), (0..x.len()).filter(|&j| x[j] == 1.0));
    let fractional_leftover = (0..x.len())
        .find(|&j| x[j] > 0.0 && x[j] < 1.0)
        .map(|j| (j, x[j]));
    PipageTrace {
        committee: Committee {
            members,
            fractional_leftover,
        },
        x,
        costs,
    }
}

fn snap(v: f64) -> f64 {
    if v < SNAP {
        0.0
    } else if v > 1.0 - SNAP {
        1.0
    } else {
        v
    }
}

/// An accepted realization and the attempt that produced it.
#[derive(Debug, Clone)]
pub struct AcceptedRound {
    pub committee: Committee,
    pub records: Vec<SatisfactionRecord>,
    /// Zero-based attempt index.
    pub attempt: usize,
}

/// Draws realizations with seeds `derive_seed(seed, a)` for
/// `a = 0, 1, ...` until one is accepted or `cap` attempts have failed.
/// The accepted attempt is always the lowest accepted index, so the result
/// does not depend on thread scheduling.
pub fn round_until_accepted<S, F>(
    inst: &Instance<S>,
    w: &[usize],
    utilities: &[S],
    budget: S,
    gamma: f64,
    beta: f64,
    cap: usize,
    seed: u64,
    round: usize,
    draw: F,
) -> Result<AcceptedRound>
where
    S: Scalar,
    F: Fn(u64) -> Committee + Sync,
{
    let attempt = |a: usize| {
        let committee = draw(derive_seed(seed, a as u64));
        let records = gamma_satisfaction(inst, w, utilities, &committee.members, gamma);
        let ok = accept_realization(inst, &committee.members, &records, budget, beta);
        (committee, records, ok)
    };
    let found = (0..cap).into_par_iter().find_map_first(|a| {
        let (committee, records, ok) = attempt(a);
        ok.then_some(AcceptedRound {
            committee,
            records,
            attempt: a,
        })
    });
    found.ok_or_else(|| {
        let best = (0..cap.min(64))
            .map(|a| attempt(a).1.iter().filter(|r| r.satisfied).count())
            .max()
            .unwrap_or(0);
        Error::RoundingCapExhausted {
            round,
            attempts: cap,
            best_satisfied: best,
            required: acceptance_threshold(beta, inst.epsilon.as_f64(), w.len()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    fn unit_instance(m: usize, budget: f64) -> Instance<f64> {
        let cands: Vec<String> = (0..m)
            .map(|j| format!(r#"{{"id": "c{j}", "size": 1}}"#))
            .collect();
        let weights: Vec<String> = (0..m).map(|j| format!(r#""c{j}": {}"#, j + 1)).collect();
        let json = format!(
            r#"{{"budget": {budget}, "candidates": [{}], "voters": [{{"id": "v", "utility": {{"type": "additive", "weights": {{{}}}}}}}]}}"#,
            cands.join(","),
            weights.join(",")
        );
        parse_instance(&json).unwrap()
    }

    #[test]
    fn beta_values() {
        assert!((beta_submodular(0.21, 7.435) - 0.0535).abs() < 5e-4);
        assert!((beta_additive(6.7) - 0.02242).abs() < 1e-5);
        assert_eq!(
            acceptance_threshold(beta_submodular(0.21, 7.435), 0.01, 100),
            94
        );
        assert_eq!(acceptance_threshold(0.05, 0.01, 1), 1);
    }

    #[test]
    fn integral_x_rounds_deterministically() {
        let inst = unit_instance(4, 2.0);
        let x = [1.0, 0.0, 1.0, 0.0];
        for seed in 0..20 {
            let c = sample_independent(&inst, &x, 2.0, seed);
            assert_eq!(c.members.iter().collect::<Vec<_>>(), vec![0, 2]);
        }
    }

    #[test]
    fn unaffordable_candidates_never_drawn() {
        let inst = unit_instance(4, 2.0);
        let c = sample_independent(&inst, &[1.0; 4], 0.5, 3);
        assert!(c.members.is_empty());
    }

    #[test]
    fn binomial_mean() {
        let inst = unit_instance(10, 5.0);
        let x = [0.5; 10];
        let trials = 10_000;
        let total: usize = (0..trials)
            .map(|s| sample_independent(&inst, &x, 5.0, s).members.count())
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 5.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn over_budget_rejected_and_single_satisfied_voter_accepted() {
        let inst = unit_instance(4, 2.0);
        let all = CandidateSet::full(4);
        let recs = gamma_satisfaction(&inst, &[0], &[1.0], &all, 7.435);
        assert!(recs[0].satisfied);
        assert!(!accept_realization(&inst, &all, &recs, 2.0, 0.05));
        let two = CandidateSet::from_indices(4, [2, 3]);
        let recs = gamma_satisfaction(&inst, &[0], &[1.0], &two, 7.435);
        assert!(accept_realization(&inst, &two, &recs, 2.0, 0.05));
    }

    #[test]
    fn zero_fractional_utility_is_satisfied() {
        let inst = unit_instance(2, 1.0);
        let recs = gamma_satisfaction(&inst, &[0], &[0.0], &CandidateSet::empty(2), 2.0);
        assert!(recs[0].satisfied);
        assert!(recs[0].ratio.is_infinite());
    }

    #[test]
    fn full_committee_ratio_at_least_gamma_scaled() {
        let inst = unit_instance(3, 2.0);
        let full = CandidateSet::full(3);
        let u_full = inst.voters[0].evaluate(&full);
        let recs = gamma_satisfaction(&inst, &[0], &[u_full], &full, 7.0);
        assert!(recs[0].satisfied && (recs[0].ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pipage_integral_unchanged() {
        let c = round_dependent(&[1.0, 0.0, 1.0], &[1.0, 2.0, 3.0], 5);
        assert_eq!(c.members.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert!(c.fractional_leftover.is_none());
    }

    #[test]
    fn pipage_two_halves() {
        let mut first = 0;
        for seed in 0..2000 {
            let c = round_dependent(&[0.5, 0.5], &[1.0, 1.0], seed);
            assert_eq!(c.members.count(), 1);
            assert!(c.fractional_leftover.is_none());
            if c.members.contains(0) {
                first += 1;
            }
        }
        assert!((first as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn pipage_preserves_cost_each_step() {
        let sizes = [1.0, 2.5, 0.7, 3.0, 1.1];
        let x = [0.3, 0.45, 0.9, 0.2, 0.6];
        for seed in 0..200 {
            let t = round_dependent_traced(&x, &sizes, seed);
            for c in &t.costs {
                assert!((c - t.costs[0]).abs() < 1e-9);
            }
            let frac = t.x.iter().filter(|&&v| v > 0.0 && v < 1.0).count();
            assert!(frac <= 1);
        }
    }

    #[test]
    fn rejection_loop_reports_cap() {
        let inst = unit_instance(4, 2.0);
        let err = round_until_accepted(&inst, &[0], &[10.0], 2.0, 1.0, 0.0, 5, 1, 3, |_| {
            Committee::new(CandidateSet::empty(4))
        })
        .unwrap_err();
        assert!(matches!(
            err,
            Error::RoundingCapExhausted {
                round: 3,
                attempts: 5,
                ..
            }
        ));
    }
}
