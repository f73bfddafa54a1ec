//! Exact alpha-core verification.
//!
//! For a committee `O`, a pair `(S, T)` blocks at level `alpha` when
//! `cost(T) <= |S| b / n` and `u_i(T) > alpha u_i(O + q)` for every `i` in
//! `S` and every additament `q`. With `r_i(T) = u_i(T) / max_q u_i(O + q)`
//! and `k(T) = ceil(n cost(T) / b)`, the smallest `alpha` admitting no
//! blocking pair is `max_T` of the `k(T)`-th largest `r_i(T)`.

mod fractional;
mod profile;

use rayon::prelude::*;
use serde::Serialize;

pub use fractional::{check_fractional_core, FractionalCoreReport, FractionalViolation};
pub use profile::{
    gadget_structure, min_alpha_profile, sweep_committee_profiles, GadgetProfile, GadgetStructure,
    SweepReport,
};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rounding::best_additament;
use crate::scalar::Scalar;
use crate::serde_util::extended_f64;
use crate::set::CandidateSet;

/// Largest candidate count accepted by full subset enumeration.
pub const MAX_FULL_CANDIDATES: usize = 24;

/// Which enumerator [`min_alpha`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Enumeration {
    Full,
    Profile,
}

impl std::str::FromStr for Enumeration {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Enumeration::Full),
            "profile" => Ok(Enumeration::Profile),
            other => Err(Error::InvalidParams(format!(
                "unknown enumeration `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Restrict additaments to members of the deviating committee `T`.
    pub strict_additament: bool,
}

/// A blocking pair `(S, T)` witnessed at `alpha_witnessed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationCertificate {
    pub blocking_t: Vec<String>,
    pub blocking_s: Vec<String>,
    #[serde(serialize_with = "extended_f64")]
    pub alpha_witnessed: f64,
    pub cost_t: f64,
    /// `|S| b / n`.
    pub endowment: f64,
    #[serde(skip)]
    pub t: CandidateSet,
    #[serde(skip)]
    pub s: Vec<usize>,
}

impl DeviationCertificate {
    /// Re-checks every inequality of the blocking condition at `alpha` from
    /// scratch against `O`.
    pub fn blocks<S: Scalar>(
        &self,
        inst: &Instance<S>,
        o: &CandidateSet,
        alpha: f64,
        opts: VerifyOptions,
    ) -> bool {
        if self.s.is_empty() {
            return false;
        }
        let n = inst.n() as f64;
        let b = inst.budget.as_f64();
        let cost = inst.cost(&self.t).as_f64();
        if cost > self.s.len() as f64 * b / n + 1e-9 {
            return false;
        }
        let additaments: Vec<usize> = if opts.strict_additament {
            self.t.iter().collect()
        } else {
            (0..inst.m()).collect()
        };
        self.s.iter().all(|&i| {
            let v = &inst.voters[i];
            let gain = v.evaluate(&self.t).as_f64();
            let base = if additaments.is_empty() {
                vec![v.evaluate(o).as_f64()]
            } else {
                additaments
                    .iter()
                    .map(|&q| v.evaluate(&o.with(q)).as_f64())
                    .collect()
            };
            // A zero denominator is beaten by any positive gain, whatever alpha is.
            base.iter().all(|&d| {
                if d > 0.0 {
                    gain > alpha * d
                } else {
                    gain > 0.0
                }
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    #[serde(serialize_with = "extended_f64")]
    pub min_alpha: f64,
    /// Present whenever `min_alpha > 1`.
    pub certificate: Option<DeviationCertificate>,
    pub enumeration: Enumeration,
    pub strict_additament: bool,
    /// Deviating committees (or profiles) examined.
    pub examined: u64,
}

/// `num / den` with `0/0 = 0` and `x/0 = +inf`.
#[inline]
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Smallest coalition that can afford `cost`: `max(1, ceil(n cost / b))`.
#[inline]
pub(crate) fn coalition_size(n: usize, cost: f64, b: f64) -> usize {
    ((n as f64 * cost / b - 1e-9).ceil().max(1.0)) as usize
}

/// The `k`-th largest ratio and the voters achieving the top `k` (ties to
/// the lower index), or `-inf` when `k > n`.
pub(crate) fn kth_largest(ratios: &[f64], k: usize) -> (f64, Vec<usize>) {
    if k > ratios.len() {
        return (f64::NEG_INFINITY, Vec::new());
    }
    let mut idx: Vec<usize> = (0..ratios.len()).collect();
    idx.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
    idx.truncate(k);
    (ratios[idx[k - 1]], idx)
}

/// Best blocking witness found so far.
#[derive(Debug, Clone)]
pub(crate) struct Witness {
    pub alpha: f64,
    pub t: CandidateSet,
    pub s: Vec<usize>,
}

pub(crate) fn certificate<S: Scalar>(inst: &Instance<S>, w: &Witness) -> DeviationCertificate {
    DeviationCertificate {
        blocking_t: inst.ids_of(&w.t),
        blocking_s: w.s.iter().map(|&i| inst.voters[i].id.clone()).collect(),
        alpha_witnessed: w.alpha,
        cost_t: inst.cost(&w.t).as_f64(),
        endowment: w.s.len() as f64 * inst.budget.as_f64() / inst.n() as f64,
        t: w.t.clone(),
        s: w.s.clone(),
    }
}

/// Dispatches to the full or profile enumerator.
pub fn min_alpha<S: Scalar>(
    inst: &Instance<S>,
    o: &CandidateSet,
    enumeration: Enumeration,
    opts: VerifyOptions,
) -> Result<VerifyReport> {
    match enumeration {
        Enumeration::Full => min_alpha_full(inst, o, opts),
        Enumeration::Profile => min_alpha_profile(inst, o, opts),
    }
}

struct FullSearch<'a, S> {
    inst: &'a Instance<S>,
    o: &'a CandidateSet,
    order: Vec<usize>,
    sizes: Vec<f64>,
    budget: f64,
    /// `max_q u_i(O + q)` when additaments range over all candidates.
    denominators: Option<Vec<f64>>,
}

impl<S: Scalar> FullSearch<'_, S> {
    fn alpha_of(&self, t: &CandidateSet, cost: f64) -> (f64, Vec<usize>) {
        let n = self.inst.n();
        let ratios: Vec<f64> = (0..n)
            .map(|i| {
                let v = &self.inst.voters[i];
                let num = v.evaluate(t).as_f64();
                let den = match &self.denominators {
                    Some(d) => d[i],
                    None if t.is_empty() => v.evaluate(self.o).as_f64(),
                    None => t
                        .iter()
                        .map(|q| v.evaluate(&self.o.with(q)).as_f64())
                        .fold(f64::NEG_INFINITY, f64::max),
                };
                ratio(num, den)
            })
            .collect();
        kth_largest(&ratios, coalition_size(n, cost, self.budget))
    }

    fn visit(&self, t: &CandidateSet, cost: f64, best: &mut Option<Witness>, count: &mut u64) {
        *count += 1;
        let (alpha, s) = self.alpha_of(t, cost);
        if best.as_ref().map_or(true, |w| alpha > w.alpha) {
            *best = Some(Witness {
                alpha,
                t: t.clone(),
                s,
            });
        }
    }

    fn dfs(
        &self,
        pos: usize,
        t: &mut CandidateSet,
        cost: f64,
        best: &mut Option<Witness>,
        count: &mut u64,
    ) {
        self.visit(t, cost, best, count);
        for p in pos..self.order.len() {
            let j = self.order[p];
            let next = cost + self.sizes[j];
            if next > self.budget + 1e-9 {
                break;
            }
            t.insert(j);
            self.dfs(p + 1, t, next, best, count);
            t.remove(j);
        }
    }
}

/// Brute force over every deviating committee within the budget.
pub fn min_alpha_full<S: Scalar>(
    inst: &Instance<S>,
    o: &CandidateSet,
    opts: VerifyOptions,
) -> Result<VerifyReport> {
    let m = inst.m();
    if m > MAX_FULL_CANDIDATES {
        return Err(Error::EnumerationTooLarge {
            estimate: format!("2^{m} = {}", 1u128 << m),
            unit: "subsets",
            limit: format!("2^{MAX_FULL_CANDIDATES}"),
        });
    }
    if o.universe() != m {
        return Err(Error::InvalidParams(
            "committee universe does not match instance".into(),
        ));
    }
    let sizes: Vec<f64> = inst.sizes().iter().map(|s| s.as_f64()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| sizes[a].total_cmp(&sizes[b]).then(a.cmp(&b)));
    let denominators = (!opts.strict_additament).then(|| {
        (0..inst.n())
            .map(|i| best_additament(inst, i, o).0.as_f64())
            .collect()
    });
    let search = FullSearch {
        inst,
        o,
        order,
        sizes,
        budget: inst.budget.as_f64(),
        denominators,
    };

    // Shard 0 is the empty committee; shard p + 1 holds the committees whose
    // first member in size order is at position p.
    let shards: Vec<(Option<Witness>, u64)> = (0..=m)
        .into_par_iter()
        .map(|shard| {
            let mut best = None;
            let mut count = 0;
            let mut t = CandidateSet::empty(m);
            if shard == 0 {
                search.visit(&t, 0.0, &mut best, &mut count);
            } else {
                let j = search.order[shard - 1];
                if search.sizes[j] <= search.budget + 1e-9 {
                    t.insert(j);
                    search.dfs(shard, &mut t, search.sizes[j], &mut best, &mut count);
                }
            }
            (best, count)
        })
        .collect();

    let mut best: Option<Witness> = None;
    let mut examined = 0;
    for (w, c) in shards {
        examined += c;
        if let Some(w) = w {
            if best.as_ref().map_or(true, |b| w.alpha > b.alpha) {
                best = Some(w);
            }
        }
    }
    let best = best.expect("the empty committee is always examined");
    Ok(VerifyReport {
        min_alpha: best.alpha,
        certificate: (best.alpha > 1.0).then(|| certificate(inst, &best)),
        enumeration: Enumeration::Full,
        strict_additament: opts.strict_additament,
        examined,
    })
}
