//! Verification in count-profile space for gadget instances.
//!
//! When every voter's utility depends only on how many members of each
//! gadget are selected, and candidates have unit size, a committee can be
//! replaced by its vector of per-gadget counts. The number of profiles is
//! `prod_g (|g| + 1)` instead of `2^m`.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    certificate, coalition_size, kth_largest, ratio, Enumeration, VerifyOptions, VerifyReport,
    Witness,
};
use crate::error::{Error, Result};
use crate::model::{gadget_value, GadgetKind, Instance};
use crate::scalar::Scalar;
use crate::set::CandidateSet;

/// Per-gadget selection counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GadgetProfile {
    pub counts: Vec<usize>,
}

impl GadgetProfile {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone)]
struct GadgetVoter {
    kind: GadgetKind,
    favorite: usize,
    second: usize,
    param: f64,
    u_max: f64,
}

/// The gadgets of an instance and each voter's favorite and second gadget.
#[derive(Debug, Clone)]
pub struct GadgetStructure {
    /// Gadget member lists, ordered by smallest member.
    pub gadgets: Vec<Vec<usize>>,
    voters: Vec<GadgetVoter>,
    budget: f64,
}

impl GadgetStructure {
    pub fn sizes(&self) -> Vec<usize> {
        self.gadgets.iter().map(|g| g.len()).collect()
    }

    /// Number of count profiles, `prod_g (|g| + 1)`.
    pub fn profile_count(&self) -> u64 {
        self.gadgets.iter().map(|g| g.len() as u64 + 1).product()
    }

    pub fn profile_of(&self, o: &CandidateSet) -> GadgetProfile {
        GadgetProfile {
            counts: self
                .gadgets
                .iter()
                .map(|g| g.iter().filter(|&&j| o.contains(j)).count())
                .collect(),
        }
    }

    /// A committee with the given counts, taking members of `prefer` first
    /// and then the lowest indices.
    pub fn realize(&self, counts: &[usize], prefer: &CandidateSet, m: usize) -> CandidateSet {
        let mut t = CandidateSet::empty(m);
        for (g, &c) in self.gadgets.iter().zip(counts) {
            let inside = g.iter().filter(|&&j| prefer.contains(j));
            let outside = g.iter().filter(|&&j| !prefer.contains(j));
            for &j in inside.chain(outside).take(c) {
                t.insert(j);
            }
        }
        t
    }

    /// Normalized utility of voter `i` at `counts`, through the same gadget
    /// formula as the subset oracle.
    fn utility(&self, i: usize, counts: &[usize]) -> f64 {
        let v = &self.voters[i];
        let raw = gadget_value(
            v.kind,
            counts[v.favorite],
            self.gadgets[v.favorite].len(),
            counts[v.second],
            self.gadgets[v.second].len(),
            v.param,
        );
        raw / v.u_max
    }

    fn utility_plus(&self, i: usize, counts: &mut [usize], g: usize) -> f64 {
        counts[g] += 1;
        let u = self.utility(i, counts);
        counts[g] -= 1;
        u
    }

    /// `max_q u_i(O + q)` over all candidates.
    fn best_additament(&self, i: usize, o: &[usize]) -> f64 {
        let mut counts = o.to_vec();
        let mut best = self.utility(i, &counts);
        for g in 0..self.gadgets.len() {
            if counts[g] < self.gadgets[g].len() {
                best = best.max(self.utility_plus(i, &mut counts, g));
            }
        }
        best
    }

    /// `max_{q in T} u_i(O + q)` for the alignment of `T` that overlaps `O`
    /// as much as possible, which minimizes every voter's denominator at once.
    fn best_strict_additament(&self, i: usize, o: &[usize], t: &[usize]) -> f64 {
        let mut counts = o.to_vec();
        let base = self.utility(i, &counts);
        let mut best = f64::NEG_INFINITY;
        for g in 0..self.gadgets.len() {
            if t[g] == 0 {
                continue;
            }
            let u = if t[g] > o[g] {
                self.utility_plus(i, &mut counts, g)
            } else {
                base
            };
            best = best.max(u);
        }
        if best == f64::NEG_INFINITY {
            base
        } else {
            best
        }
    }
}

/// Checks the profile preconditions: gadget voters only, unit sizes, and
/// gadgets that partition the candidates.
pub fn gadget_structure<S: Scalar>(inst: &Instance<S>) -> Result<GadgetStructure> {
    let m = inst.m();
    if inst.candidates.iter().any(|c| c.size != S::one()) {
        return Err(Error::ProfilePrecondition(
            "all candidates must have unit size".into(),
        ));
    }
    let mut gadgets: Vec<CandidateSet> = Vec::new();
    let mut find_or_add = |set: &CandidateSet| -> Result<usize> {
        if let Some(g) = gadgets.iter().position(|g| g == set) {
            return Ok(g);
        }
        if gadgets.iter().any(|g| !g.is_disjoint(set)) {
            return Err(Error::ProfilePrecondition("gadgets overlap".into()));
        }
        gadgets.push(set.clone());
        Ok(gadgets.len() - 1)
    };
    let mut raw = Vec::new();
    for v in &inst.voters {
        let Some((kind, fav, sec, param)) = v.oracle.gadget() else {
            return Err(Error::ProfilePrecondition(format!(
                "voter `{}` does not have a gadget utility",
                v.id
            )));
        };
        let (f, s) = (find_or_add(fav)?, find_or_add(sec)?);
        raw.push((kind, f, s, param.as_f64(), v.u_max.as_f64()));
    }
    let mut union = CandidateSet::empty(m);
    for g in &gadgets {
        union.union_with(g);
    }
    if union.count() != m {
        return Err(Error::ProfilePrecondition(
            "gadgets do not cover every candidate".into(),
        ));
    }
    // Reorder gadgets by smallest member for a stable layout.
    let mut order: Vec<usize> = (0..gadgets.len()).collect();
    order.sort_by_key(|&g| gadgets[g].iter().next());
    let mut rank = vec![0; gadgets.len()];
    for (r, &g) in order.iter().enumerate() {
        rank[g] = r;
    }
    Ok(GadgetStructure {
        gadgets: order.iter().map(|&g| gadgets[g].iter().collect()).collect(),
        voters: raw
            .into_iter()
            .map(|(kind, f, s, param, u_max)| GadgetVoter {
                kind,
                favorite: rank[f],
                second: rank[s],
                param,
                u_max,
            })
            .collect(),
        budget: inst.budget.as_f64(),
    })
}

/// Calls `f` for every profile with `counts[g] <= sizes[g]` and total at
/// most `cap`, in lexicographic order.
fn for_each_profile(sizes: &[usize], cap: usize, mut f: impl FnMut(&[usize])) {
    let mut counts = vec![0usize; sizes.len()];
    let mut total = 0;
    loop {
        if total <= cap {
            f(&counts);
        }
        // Odometer increment, last gadget fastest.
        let mut g = sizes.len();
        loop {
            if g == 0 {
                return;
            }
            g -= 1;
            if counts[g] < sizes[g] && total < cap {
                counts[g] += 1;
                total += 1;
                break;
            }
            total -= counts[g];
            counts[g] = 0;
        }
    }
}

/// Deviating profiles grouped by the coalition size they need.
struct Levels {
    /// `(k, profiles, utilities[profile][voter])`.
    levels: Vec<(usize, Vec<Vec<usize>>, Vec<Vec<f64>>)>,
    examined: u64,
}

/// For each coalition size `k`, the profiles that are maximal under the cost
/// cap `k b / n`. Monotone utilities make these the only candidates for the
/// worst deviation at that level.
fn maximal_levels(gs: &GadgetStructure, n: usize) -> Levels {
    let sizes = gs.sizes();
    let full: usize = sizes.iter().sum();
    let mut levels = Vec::new();
    let mut examined = 0;
    let mut last_cap = None;
    for k in 1..=n {
        let cap = ((k as f64 * gs.budget / n as f64) + 1e-9).floor() as usize;
        let cap = cap.min(full);
        if last_cap == Some(cap) {
            continue;
        }
        last_cap = Some(cap);
        let mut profiles = Vec::new();
        for_each_profile(&sizes, cap, |c| {
            let total: usize = c.iter().sum();
            let maximal = total == cap || c.iter().zip(&sizes).all(|(a, s)| a == s);
            if maximal {
                profiles.push(c.to_vec());
            }
        });
        examined += profiles.len() as u64;
        let utils = profiles
            .iter()
            .map(|c| (0..n).map(|i| gs.utility(i, c)).collect())
            .collect();
        levels.push((k, profiles, utils));
    }
    Levels { levels, examined }
}

fn best_over_levels(
    gs: &GadgetStructure,
    levels: &Levels,
    o: &[usize],
    n: usize,
) -> (f64, usize, usize, Vec<usize>) {
    let dens: Vec<f64> = (0..n).map(|i| gs.best_additament(i, o)).collect();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    let mut ratios = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for (li, (k, _, utils)) in levels.levels.iter().enumerate() {
        if *k > n {
            continue;
        }
        for (pi, u) in utils.iter().enumerate() {
            for i in 0..n {
                ratios[i] = ratio(u[i], dens[i]);
            }
            scratch.copy_from_slice(&ratios);
            let (_, kth, _) = scratch.select_nth_unstable_by(*k - 1, |a, b| b.total_cmp(a));
            if *kth > best.0 {
                best = (*kth, li, pi);
            }
        }
    }
    let (alpha, li, pi) = best;
    let u = &levels.levels[li].2[pi];
    let ratios: Vec<f64> = (0..n).map(|i| ratio(u[i], dens[i])).collect();
    let (_, s) = kth_largest(&ratios, levels.levels[li].0);
    (alpha, li, pi, s)
}

/// Minimum alpha for committee `o`, enumerating count profiles.
pub fn min_alpha_profile<S: Scalar>(
    inst: &Instance<S>,
    o: &CandidateSet,
    opts: VerifyOptions,
) -> Result<VerifyReport> {
    let gs = gadget_structure(inst)?;
    let n = inst.n();
    let m = inst.m();
    let o_counts = gs.profile_of(o).counts;

    let (witness, examined) = if opts.strict_additament {
        // Denominators depend on T, so every feasible profile is examined.
        let sizes = gs.sizes();
        let cap = (gs.budget + 1e-9).floor() as usize;
        let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
        let mut examined = 0;
        let mut ratios = vec![0.0; n];
        for_each_profile(&sizes, cap, |t| {
            examined += 1;
            let total: usize = t.iter().sum();
            for (i, r) in ratios.iter_mut().enumerate() {
                *r = ratio(gs.utility(i, t), gs.best_strict_additament(i, &o_counts, t));
            }
            let (alpha, s) = kth_largest(&ratios, coalition_size(n, total as f64, gs.budget));
            if best.as_ref().map_or(true, |b| alpha > b.0) {
                best = Some((alpha, t.to_vec(), s));
            }
        });
        let (alpha, t, s) = best.expect("the empty profile is always examined");
        (
            Witness {
                alpha,
                t: gs.realize(&t, o, m),
                s,
            },
            examined,
        )
    } else {
        let levels = maximal_levels(&gs, n);
        let (alpha, li, pi, s) = best_over_levels(&gs, &levels, &o_counts, n);
        let t = &levels.levels[li].1[pi];
        (
            Witness {
                alpha,
                t: gs.realize(t, o, m),
                s,
            },
            levels.examined,
        )
    };

    Ok(VerifyReport {
        min_alpha: witness.alpha,
        certificate: (witness.alpha > 1.0).then(|| certificate(inst, &witness)),
        enumeration: Enumeration::Profile,
        strict_additament: opts.strict_additament,
        examined,
    })
}

/// Result of checking every committee profile of a gadget instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    /// All count profiles, feasible or not.
    pub total_profiles: u64,
    /// Profiles within the budget.
    pub feasible_profiles: u64,
    /// Maximal deviating profiles examined per committee.
    pub deviation_profiles: u64,
    /// Smallest min-alpha over feasible committees.
    pub min_alpha: f64,
    /// Committee profile achieving it (first in lexicographic order).
    pub argmin: GadgetProfile,
    /// Largest min-alpha over feasible committees.
    pub max_alpha: f64,
}

/// Computes min-alpha for every feasible committee profile (additaments over
/// all candidates).
pub fn sweep_committee_profiles<S: Scalar>(inst: &Instance<S>) -> Result<SweepReport> {
    let gs = gadget_structure(inst)?;
    let n = inst.n();
    let sizes = gs.sizes();
    let levels = maximal_levels(&gs, n);
    let full: usize = sizes.iter().sum();
    let mut committees = Vec::new();
    for_each_profile(&sizes, full, |c| committees.push(c.to_vec()));
    let total_profiles = committees.len() as u64;
    let cap = (gs.budget + 1e-9).floor() as usize;
    committees.retain(|c| c.iter().sum::<usize>() <= cap);

    let alphas: Vec<f64> = committees
        .par_iter()
        .map(|o| best_over_levels(&gs, &levels, o, n).0)
        .collect();
    let mut arg = 0;
    for (i, &a) in alphas.iter().enumerate() {
        if a < alphas[arg] {
            arg = i;
        }
    }
    Ok(SweepReport {
        total_profiles,
        feasible_profiles: committees.len() as u64,
        deviation_profiles: levels.examined,
        min_alpha: alphas[arg],
        argmin: GadgetProfile {
            counts: committees[arg].clone(),
        },
        max_alpha: alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_odometer_counts() {
        let mut all = 0;
        for_each_profile(&[5; 6], 30, |_| all += 1);
        assert_eq!(all, 46_656);
        let mut capped = Vec::new();
        for_each_profile(&[2, 1], 2, |c| capped.push(c.to_vec()));
        assert_eq!(
            capped,
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1], vec![2, 0]]
        );
        let mut single = 0;
        for_each_profile(&[4], 4, |_| single += 1);
        assert_eq!(single, 5);
    }
}
