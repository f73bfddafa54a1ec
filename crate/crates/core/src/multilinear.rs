//! Multilinear extension `U_i(x) = E[u_i(T)]` for `T` drawn with independent
//! inclusion probabilities `x_j`, and its partial derivatives.
//!
//! Three evaluation methods are used, chosen per voter:
//!
//! * additive oracles have the closed forms `sum_j w_j x_j` and `w_j`;
//! * other oracles over at most `enumerate_up_to` candidates are evaluated
//!   exactly from a `2^m` table of subset values;
//! * everything else is estimated by Monte Carlo with common random numbers.
//!
//! All values are normalized by the voter's best singleton.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Instance, UtilityOracle, Voter};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;
use crate::set::CandidateSet;

/// Samples per independently seeded shard in the Monte Carlo estimators.
const SHARD: usize = 1024;

/// Largest candidate count the exact subset table is ever built for.
pub const MAX_ENUMERATION: usize = 20;

/// A fractional committee `x` with per-candidate lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAllocation<S> {
    x: Vec<S>,
    floors: Vec<S>,
    sizes: Vec<S>,
    large: CandidateSet,
    cost_large: S,
}

impl<S: Scalar> FractionalAllocation<S> {
    /// Checks `floors <= x <= 1` (to tolerance) and caches the cost on `large`.
    pub fn new(x: Vec<S>, floors: Vec<S>, sizes: Vec<S>, large: CandidateSet) -> Result<Self> {
        let m = x.len();
        if floors.len() != m || sizes.len() != m || large.universe() != m {
            return Err(Error::InvalidParams("allocation dimension mismatch".into()));
        }
        let tol = S::tolerance();
        for j in 0..m {
            if !(x[j] >= floors[j] - tol && x[j] <= S::one() + tol) {
                return Err(Error::InvalidParams(format!(
                    "x[{j}] = {} outside [{}, 1]",
                    x[j], floors[j]
                )));
            }
        }
        let cost_large = large.iter().map(|j| sizes[j] * x[j]).sum();
        Ok(Self {
            x,
            floors,
            sizes,
            large,
            cost_large,
        })
    }

    /// An allocation with zero floors where every candidate counts toward cost.
    pub fn unconstrained(x: Vec<S>, sizes: Vec<S>) -> Result<Self> {
        let m = x.len();
        Self::new(x, vec![S::zero(); m], sizes, CandidateSet::full(m))
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }

    pub fn floors(&self) -> &[S] {
        &self.floors
    }

    pub fn sizes(&self) -> &[S] {
        &self.sizes
    }

    pub fn large(&self) -> &CandidateSet {
        &self.large
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Cached `sum_{j in large} s_j x_j`.
    pub fn cost_large(&self) -> S {
        self.cost_large
    }

    pub fn recompute_cost_large(&self) -> S {
        self.large.iter().map(|j| self.sizes[j] * self.x[j]).sum()
    }

    /// `sum_j s_j x_j` over every candidate.
    pub fn total_cost(&self) -> S {
        self.x.iter().zip(&self.sizes).map(|(&x, &s)| x * s).sum()
    }

    /// Moves `delta` units of cost from `from` to `to`; the cached cost is
    /// unchanged by construction.
    pub fn shift(&mut self, to: usize, from: usize, delta: S) {
        self.x[to] = self.x[to] + delta / self.sizes[to];
        self.x[from] = self.x[from] - delta / self.sizes[from];
    }

    pub fn is_integral(&self) -> bool {
        is_integral(&self.x)
    }

    pub fn into_vec(self) -> Vec<S> {
        self.x
    }
}

/// Accuracy and randomness settings for the sampled estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Additive error target.
    pub delta: f64,
    /// Target probability that one estimate misses by more than `delta`.
    pub fail_prob: f64,
    /// Committees sampled per estimate.
    pub samples_h: usize,
    pub seed: u64,
    /// Oracles over at most this many candidates are enumerated exactly;
    /// 0 forces sampling.
    pub enumerate_up_to: usize,
}

impl EstimatorConfig {
    pub const DEFAULT_ENUMERATE_UP_TO: usize = 12;

    /// `H = ceil(m^2 ln(2/p) / delta^2)`, enough for a Hoeffding bound over
    /// normalized values in `[0, m]`.
    pub fn auto_samples(m: usize, delta: f64, fail_prob: f64) -> usize {
        let m = m.max(1) as f64;
        (m * m * (2.0 / fail_prob).ln() / (delta * delta)).ceil() as usize
    }

    pub fn auto(m: usize, delta: f64, fail_prob: f64, seed: u64) -> Self {
        Self {
            delta,
            fail_prob,
            samples_h: Self::auto_samples(m, delta, fail_prob),
            seed,
            enumerate_up_to: Self::DEFAULT_ENUMERATE_UP_TO,
        }
    }

    /// Fixed sample count, recording `delta` only as metadata.
    pub fn fixed(samples_h: usize, delta: f64, seed: u64) -> Self {
        Self {
            delta,
            fail_prob: 0.01,
            samples_h,
            seed,
            enumerate_up_to: Self::DEFAULT_ENUMERATE_UP_TO,
        }
    }

    /// Error target used by the worst-case analysis: `eps^6 / (64 n m^5)`.
    pub fn proof_delta(eps: f64, n: usize, m: usize) -> f64 {
        eps.powi(6) / (64.0 * n as f64 * (m as f64).powi(5))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sampling_only(mut self) -> Self {
        self.enumerate_up_to = 0;
        self
    }

    fn check(&self) -> Result<()> {
        if self.samples_h == 0 {
            return Err(Error::InvalidParams(
                "sample count H must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::fixed(2048, 1e-3, 0)
    }
}

/// How a voter's extension is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Enumerated,
    Sampled,
}

impl Method {
    pub fn is_exact(self) -> bool {
        !matches!(self, Method::Sampled)
    }
}

pub fn method_for<S: Scalar>(voter: &Voter<S>, m: usize, cfg: &EstimatorConfig) -> Method {
    if voter.oracle.is_additive() {
        Method::ClosedForm
    } else if m <= cfg.enumerate_up_to.min(MAX_ENUMERATION) {
        Method::Enumerated
    } else {
        Method::Sampled
    }
}

fn is_integral<S: Scalar>(x: &[S]) -> bool {
    x.iter().all(|&v| v == S::zero() || v == S::one())
}

fn vertex<S: Scalar>(x: &[S]) -> CandidateSet {
    CandidateSet::from_indices(x.len(), (0..x.len()).filter(|&j| x[j] == S::one()))
}

fn clamp_marginal<S: Scalar>(voter: &Voter<S>, g: S) -> S {
    let g = g.max(S::zero());
    match voter.oracle {
        UtilityOracle::GadgetGeneral { .. } => g,
        _ => g.min(S::one()),
    }
}

/// Normalized values of every subset, indexed by bitmask.
pub fn subset_table<S: Scalar>(voter: &Voter<S>, m: usize) -> Result<Vec<S>> {
    if m > MAX_ENUMERATION {
        return Err(Error::EnumerationTooLarge {
            estimate: format!("2^{m}"),
            unit: "subsets",
            limit: format!("2^{MAX_ENUMERATION}"),
        });
    }
    Ok((0..1u64 << m)
        .map(|mask| voter.evaluate(&CandidateSet::from_mask(m, mask)))
        .collect())
}

/// Expectation of a table indexed by bitmask when bit `k` is set with
/// probability `probs[k]`, contracting from the highest bit down.
fn contract<S: Scalar>(mut g: Vec<S>, probs: &[S]) -> S {
    for (bit, &p) in probs.iter().enumerate().rev() {
        let half = 1usize << bit;
        for k in 0..half {
            g[k] = (S::one() - p) * g[k] + p * g[k + half];
        }
        g.truncate(half);
    }
    g[0]
}

/// Exact extension value from a subset table.
pub fn table_value<S: Scalar>(table: &[S], x: &[S]) -> S {
    contract(table.to_vec(), x)
}

/// Exact partial derivatives of every coordinate from a subset table.
pub fn table_gradient<S: Scalar>(table: &[S], x: &[S]) -> Vec<S> {
    let m = x.len();
    (0..m)
        .map(|j| {
            let bit = 1usize << j;
            let low = bit - 1;
            let diff: Vec<S> = (0..1usize << (m - 1))
                .map(|c| {
                    let mask = ((c >> j) << (j + 1)) | (c & low);
                    table[mask | bit] - table[mask]
                })
                .collect();
            let others: Vec<S> = x
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &p)| p)
                .collect();
            contract(diff, &others)
        })
        .collect()
}

fn draw_committee(rng: &mut impl Rng, x: &[f64], t: &mut CandidateSet) {
    t.clear();
    for (j, &p) in x.iter().enumerate() {
        let u: f64 = rng.gen();
        if u < p {
            t.insert(j);
        }
    }
}

fn shard_seeds(h: usize, seed: u64) -> Vec<(u64, usize)> {
    (0..h.div_ceil(SHARD))
        .map(|s| (derive_seed(seed, s as u64), SHARD.min(h - s * SHARD)))
        .collect()
}

/// Monte Carlo sums over `H` committees shared by all voters in `voters`:
/// per voter, `sum u(T)` and, for every `j` in `coords`,
/// `sum u(T + j) - u(T - j)`.
fn sampled_sums<S: Scalar>(
    voters: &[&Voter<S>],
    x: &[S],
    coords: &CandidateSet,
    cfg: &EstimatorConfig,
) -> Vec<(S, Vec<S>)> {
    let m = x.len();
    let xf: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    let coord_list: Vec<usize> = coords.iter().collect();
    let partials: Vec<Vec<(S, Vec<S>)>> = shard_seeds(cfg.samples_h, cfg.seed)
        .into_par_iter()
        .map(|(seed, count)| {
            let mut rng = rng_from_seed(seed);
            let mut t = CandidateSet::empty(m);
            let mut acc: Vec<(S, Vec<S>)> = voters
                .iter()
                .map(|_| (S::zero(), vec![S::zero(); m]))
                .collect();
            for _ in 0..count {
                draw_committee(&mut rng, &xf, &mut t);
                for (v, (sum, grads)) in voters.iter().zip(acc.iter_mut()) {
                    let base = v.evaluate(&t);
                    *sum = *sum + base;
                    for &j in &coord_list {
                        let marginal = if t.contains(j) {
                            t.remove(j);
                            let lo = v.evaluate(&t);
                            t.insert(j);
                            base - lo
                        } else {
                            t.insert(j);
                            let hi = v.evaluate(&t);
                            t.remove(j);
                            hi - base
                        };
                        grads[j] = grads[j] + marginal;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total: Vec<(S, Vec<S>)> = voters
        .iter()
        .map(|_| (S::zero(), vec![S::zero(); m]))
        .collect();
    for shard in partials {
        for ((ts, tg), (s, g)) in total.iter_mut().zip(shard) {
            *ts = *ts + s;
            for (a, b) in tg.iter_mut().zip(g) {
                *a = *a + b;
            }
        }
    }
    let h = S::lit(cfg.samples_h as f64);
    for (s, g) in total.iter_mut() {
        *s = *s / h;
        g.iter_mut().for_each(|v| *v = *v / h);
    }
    total
}

/// `U_i(x)` for one voter.
pub fn multilinear_value<S: Scalar>(voter: &Voter<S>, x: &[S], cfg: &EstimatorConfig) -> Result<S> {
    cfg.check()?;
    let m = x.len();
    if let UtilityOracle::Additive { weights } = &voter.oracle {
        return Ok(weights.iter().zip(x).map(|(&w, &p)| w * p).sum::<S>() / voter.u_max);
    }
    if is_integral(x) {
        return Ok(voter.evaluate(&vertex(x)));
    }
    match method_for(voter, m, cfg) {
        Method::Enumerated => Ok(table_value(&subset_table(voter, m)?, x)),
        _ => Ok(sampled_sums(&[voter], x, &CandidateSet::empty(m), cfg)[0].0),
    }
}

/// `dU_i/dx_j` for one voter and coordinate.
pub fn multilinear_grad<S: Scalar>(
    voter: &Voter<S>,
    x: &[S],
    j: usize,
    cfg: &EstimatorConfig,
) -> Result<S> {
    cfg.check()?;
    let m = x.len();
    if j >= m {
        return Err(Error::InvalidParams(format!("coordinate {j} out of range")));
    }
    if let UtilityOracle::Additive { weights } = &voter.oracle {
        return Ok(weights[j] / voter.u_max);
    }
    if is_integral(x) {
        let t = vertex(x);
        return Ok(clamp_marginal(
            voter,
            voter.evaluate(&t.with(j)) - voter.evaluate(&t.without(j)),
        ));
    }
    let g = match method_for(voter, m, cfg) {
        Method::Enumerated => table_gradient(&subset_table(voter, m)?, x)[j],
        _ => sampled_sums(&[voter], x, &CandidateSet::from_indices(m, [j]), cfg)[0].1[j],
    };
    Ok(clamp_marginal(voter, g))
}

/// Utilities of the voters in `W` and the Nash welfare gradient
/// `sum_i (dU_i/dx_j) / U_i` on the requested coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle<S> {
    /// `U_i(x)`, in the order of the voter list passed in.
    pub utilities: Vec<S>,
    /// Gradient per candidate; zero outside the requested coordinates.
    pub grad: Vec<S>,
    /// True when every voter was evaluated exactly.
    pub exact: bool,
}

/// Evaluator bound to one instance that caches exact subset tables.
#[derive(Debug, Clone)]
pub struct Multilinear<'a, S> {
    inst: &'a Instance<S>,
    cfg: EstimatorConfig,
    methods: Vec<Method>,
    tables: Vec<Option<Vec<S>>>,
}

impl<'a, S: Scalar> Multilinear<'a, S> {
    pub fn new(inst: &'a Instance<S>, cfg: EstimatorConfig) -> Result<Self> {
        cfg.check()?;
        let m = inst.m();
        let methods: Vec<Method> = inst.voters.iter().map(|v| method_for(v, m, &cfg)).collect();
        let tables = inst
            .voters
            .par_iter()
            .zip(&methods)
            .map(|(v, &meth)| {
                if meth == Method::Enumerated {
                    subset_table(v, m).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            inst,
            cfg,
            methods,
            tables,
        })
    }

    pub fn instance(&self) -> &'a Instance<S> {
        self.inst
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.cfg
    }

    pub fn method(&self, voter: usize) -> Method {
        self.methods[voter]
    }

    pub fn all_exact(&self, voters: &[usize]) -> bool {
        voters.iter().all(|&i| self.methods[i].is_exact())
    }

    /// `U_i(x)`; `seed` drives the sampler for sampled voters.
    pub fn value(&self, voter: usize, x: &[S], seed: u64) -> S {
        self.values(&[voter], x, seed)[0]
    }

    /// `U_i(x)` for each listed voter. Sampled voters share one batch of
    /// committees drawn from `seed`.
    pub fn values(&self, voters: &[usize], x: &[S], seed: u64) -> Vec<S> {
        self.evaluate(voters, x, &CandidateSet::empty(x.len()), seed)
            .into_iter()
            .map(|(u, _)| u)
            .collect()
    }

    /// Nash welfare gradient over `coords`, retrying sampled estimates that
    /// come back non-positive with fresh seeds.
    pub fn bundle(
        &self,
        voters: &[usize],
        x: &[S],
        coords: &CandidateSet,
        seed: u64,
    ) -> Result<GradientBundle<S>> {
        let mut per_voter = self.evaluate(voters, x, coords, seed);
        let floor = S::lit(self.cfg.delta);
        for attempt in 1..=4u64 {
            let bad: Vec<usize> = voters
                .iter()
                .zip(&per_voter)
                .enumerate()
                .filter(|&(_, (&i, (u, _)))| self.methods[i] == Method::Sampled && *u <= floor)
                .map(|(k, _)| k)
                .collect();
            if bad.is_empty() {
                break;
            }
            let ids: Vec<usize> = bad.iter().map(|&k| voters[k]).collect();
            let redo = self.evaluate(&ids, x, coords, derive_seed(seed, attempt));
            for (k, r) in bad.into_iter().zip(redo) {
                per_voter[k] = r;
            }
        }
        let mut grad = vec![S::zero(); x.len()];
        let mut utilities = Vec::with_capacity(voters.len());
        for (&i, (u, g)) in voters.iter().zip(per_voter) {
            if u <= S::zero() {
                return Err(Error::InvalidParams(format!(
                    "voter `{}` has zero fractional utility",
                    self.inst.voters[i].id
                )));
            }
            for j in coords.iter() {
                grad[j] = grad[j] + g[j] / u;
            }
            utilities.push(u);
        }
        Ok(GradientBundle {
            utilities,
            grad,
            exact: self.all_exact(voters),
        })
    }

    fn evaluate(
        &self,
        voters: &[usize],
        x: &[S],
        coords: &CandidateSet,
        seed: u64,
    ) -> Vec<(S, Vec<S>)> {
        let m = x.len();
        let integral = is_integral(x);
        let mut out: Vec<Option<(S, Vec<S>)>> = voters
            .par_iter()
            .map(|&i| {
                let v = &self.inst.voters[i];
                match (self.methods[i], &v.oracle) {
                    (Method::ClosedForm, UtilityOracle::Additive { weights }) => {
                        let u = weights.iter().zip(x).map(|(&w, &p)| w * p).sum::<S>() / v.u_max;
                        let g = weights.iter().map(|&w| w / v.u_max).collect();
                        Some((u, g))
                    }
                    _ if integral => {
                        let t = vertex(x);
                        let base = v.evaluate(&t);
                        let mut g = vec![S::zero(); m];
                        for j in coords.iter() {
                            g[j] = clamp_marginal(
                                v,
                                v.evaluate(&t.with(j)) - v.evaluate(&t.without(j)),
                            );
                        }
                        Some((base, g))
                    }
                    (Method::Enumerated, _) => {
                        let table = self.tables[i]
                            .as_ref()
                            .expect("table built for enumerated voter");
                        let u = table_value(table, x);
                        let g = if coords.is_empty() {
                            vec![S::zero(); m]
                        } else {
                            table_gradient(table, x)
                                .into_iter()
                                .map(|g| clamp_marginal(v, g))
                                .collect()
                        };
                        Some((u, g))
                    }
                    _ => None,
                }
            })
            .collect();
        let pending: Vec<usize> = (0..voters.len()).filter(|&k| out[k].is_none()).collect();
        if !pending.is_empty() {
            let refs: Vec<&Voter<S>> = pending
                .iter()
                .map(|&k| &self.inst.voters[voters[k]])
                .collect();
            let cfg = self.cfg.with_seed(seed);
            for (k, (u, g)) in pending
                .into_iter()
                .zip(sampled_sums(&refs, x, coords, &cfg))
            {
                let v = &self.inst.voters[voters[k]];
                out[k] = Some((u, g.into_iter().map(|g| clamp_marginal(v, g)).collect()));
            }
        }
        out.into_iter()
            .map(|o| o.expect("every voter evaluated"))
            .collect()
    }
}

/// Free-standing Nash welfare gradient for the voters in `W`.
pub fn nw_gradient_bundle<S: Scalar>(
    inst: &Instance<S>,
    voters: &[usize],
    x: &FractionalAllocation<S>,
    cfg: &EstimatorConfig,
) -> Result<GradientBundle<S>> {
    for j in 0..x.len() {
        if x.x()[j] < x.floors()[j] - S::tolerance() {
            return Err(Error::InvalidParams(format!("x[{j}] below its floor")));
        }
    }
    Multilinear::new(inst, *cfg)?.bundle(voters, x.x(), x.large(), cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, UtilityOracle};
    use proptest::prelude::*;

    fn coverage_voter(m: usize) -> Voter<f64> {
        let oracle = UtilityOracle::Coverage {
            elements: vec!["a".into(), "b".into(), "c".into()],
            element_weights: vec![1.0, 2.0, 3.0],
            covers: vec![
                CandidateSet::from_indices(3, [0, 1]),
                CandidateSet::from_indices(3, [1, 2]),
                CandidateSet::from_indices(3, [2]),
            ]
            .into_iter()
            .cycle()
            .take(m)
            .collect(),
        };
        Voter::new("v", oracle, m)
    }

    /// Independent reference: the defining sum over all `2^m` subsets.
    fn brute_value(v: &Voter<f64>, x: &[f64]) -> f64 {
        let m = x.len();
        (0..1u64 << m)
            .map(|mask| {
                let p: f64 = (0..m)
                    .map(|j| if mask >> j & 1 == 1 { x[j] } else { 1.0 - x[j] })
                    .product();
                p * v.evaluate(&CandidateSet::from_mask(m, mask))
            })
            .sum()
    }

    #[test]
    fn additive_closed_form() {
        let v = Voter::new(
            "v",
            UtilityOracle::Additive {
                weights: vec![1.0, 1.0],
            },
            2,
        );
        let cfg = EstimatorConfig::default();
        assert_eq!(multilinear_value(&v, &[0.5, 0.5], &cfg).unwrap(), 1.0);
        assert_eq!(multilinear_grad(&v, &[0.3, 0.9], 1, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn zero_samples_rejected() {
        let v = coverage_voter(3);
        let cfg = EstimatorConfig::fixed(0, 1e-3, 1).sampling_only();
        assert!(multilinear_value(&v, &[0.5; 3], &cfg).is_err());
    }

    #[test]
    fn enumeration_matches_definition() {
        let v = coverage_voter(3);
        let x = [0.5, 0.5, 0.5];
        let exact = brute_value(&v, &x);
        let got = multilinear_value(&v, &x, &EstimatorConfig::default()).unwrap();
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn sampled_value_close_to_exact() {
        let v = coverage_voter(3);
        let x = [0.5, 0.5, 0.5];
        let cfg = EstimatorConfig::auto(3, 0.05, 0.01, 9).sampling_only();
        let got = multilinear_value(&v, &x, &cfg).unwrap();
        assert!((got - brute_value(&v, &x)).abs() < 3.0 * cfg.delta);
    }

    #[test]
    fn ignored_coordinate_has_zero_gradient() {
        let oracle = UtilityOracle::Coverage {
            elements: vec!["a".into()],
            element_weights: vec![1.0],
            covers: vec![CandidateSet::from_indices(1, [0]), CandidateSet::empty(1)],
        };
        let v = Voter::new("v", oracle, 2);
        let g = multilinear_grad(&v, &[0.4, 0.7], 1, &EstimatorConfig::default()).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn gradient_matches_difference_of_restrictions() {
        let v = coverage_voter(5);
        let x = [0.2, 0.7, 0.4, 0.9, 0.1];
        let cfg = EstimatorConfig::default();
        for j in 0..5 {
            let mut hi = x;
            let mut lo = x;
            hi[j] = 1.0;
            lo[j] = 0.0;
            let expect = brute_value(&v, &hi) - brute_value(&v, &lo);
            let got = multilinear_grad(&v, &x, j, &cfg).unwrap();
            assert!((got - expect).abs() < 1e-12, "j={j}: {got} vs {expect}");
        }
    }

    #[test]
    fn bundle_doubles_with_duplicate_voter() {
        let json = r#"{"budget": 2, "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}, {"id": "c", "size": 1}],
            "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"a": 2, "b": 1}}},
                       {"id": "v2", "utility": {"type": "additive", "weights": {"a": 2, "b": 1}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        let x = FractionalAllocation::unconstrained(vec![0.5, 0.5, 0.5], inst.sizes()).unwrap();
        let cfg = EstimatorConfig::default();
        let one = nw_gradient_bundle(&inst, &[0], &x, &cfg).unwrap();
        let two = nw_gradient_bundle(&inst, &[0, 1], &x, &cfg).unwrap();
        for j in 0..3 {
            assert!((two.grad[j] - 2.0 * one.grad[j]).abs() < 1e-15);
        }
        // u = (2, 1, 0)/2, U = 0.75, so d phi / d x_a = 1 / 0.75.
        assert!((one.grad[0] - 1.0 / 0.75).abs() < 1e-12);
        assert!(one.exact);
    }

    proptest! {
        #[test]
        fn exact_at_vertices(mask in 0u64..32) {
            let v = coverage_voter(5);
            let x: Vec<f64> = (0..5).map(|j| (mask >> j & 1) as f64).collect();
            let cfg = EstimatorConfig::default().sampling_only();
            let got = multilinear_value(&v, &x, &cfg).unwrap();
            prop_assert_eq!(got, v.evaluate(&CandidateSet::from_mask(5, mask)));
        }

        #[test]
        fn gradients_bounded(x in prop::collection::vec(0.0f64..=1.0, 6)) {
            let v = coverage_voter(6);
            let cfg = EstimatorConfig::fixed(256, 0.1, 3).sampling_only();
            for j in 0..6 {
                let g = multilinear_grad(&v, &x, j, &cfg).unwrap();
                prop_assert!((0.0..=1.0).contains(&g));
            }
        }

        #[test]
        fn concave_along_positive_directions(
            x in prop::collection::vec(0.0f64..0.5, 5),
            d in prop::collection::vec(0.0f64..0.5, 5),
        ) {
            let v = coverage_voter(5);
            let far: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            let mid: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b / 2.0).collect();
            let f = |p: &[f64]| brute_value(&v, p);
            let table = subset_table(&v, 5).unwrap();
            prop_assert!((table_value(&table, &mid) - f(&mid)).abs() < 1e-12);
            prop_assert!(f(&mid) >= (f(&x) + f(&far)) / 2.0 - 1e-12);
        }
    }
}
