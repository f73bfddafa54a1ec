//! Continuous local search for the Nash welfare program
//!
//! ```text
//! maximize  sum_{i in W} log U_i(x)
//! s.t.      sum_{j in C_l} s_j x_j = B,   floor_j <= x_j <= 1
//! ```
//!
//! by budget-preserving swaps: move `delta` units of cost into `j` and out of
//! `l` whenever `dphi/dx_j / s_j > dphi/dx_l / s_l + 3 eps / (4 b)`.
//!
//! The step starts at `B / (100 m)` and is halved whenever no admissible pair
//! passes the test or the steepest swap fails to raise the objective; the
//! search has converged once the step falls below `min_step`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::multilinear::{EstimatorConfig, FractionalAllocation, Method, Multilinear};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::set::CandidateSet;

/// Parameter regime for the local search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Worst-case step and estimator accuracy; exact evaluation only.
    Proof,
    /// Coarse adaptive steps and a fixed sample budget.
    Practical,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(Profile::Proof),
            "practical" => Ok(Profile::Practical),
            other => Err(Error::InvalidParams(format!("unknown profile `{other}`"))),
        }
    }
}

/// Default iteration cap of the practical profile.
pub const PRACTICAL_MAX_ITERS: usize = 100_000;
/// Committees sampled per estimate in the practical profile.
pub const PRACTICAL_SAMPLES: usize = 2048;
/// Nominal error target of the practical profile.
pub const PRACTICAL_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct NwParams<S> {
    /// Cost budget `B` on the large candidates.
    pub budget: S,
    /// First swap size, in cost units.
    pub initial_step: S,
    /// Search stops once the step drops below this.
    pub min_step: S,
    /// Relaxed swap threshold, `3 eps / (4 b)` with `b` the instance budget.
    pub threshold: S,
    pub max_iters: usize,
    pub estimator: EstimatorConfig,
    pub profile: Profile,
    /// Lower bounds per candidate; `None` uses the standard floors.
    pub floors: Option<Vec<S>>,
}

impl<S: Scalar> NwParams<S> {
    pub fn practical(inst: &Instance<S>, budget: S, seed: u64) -> Self {
        let m = S::lit(inst.m() as f64);
        let initial_step = budget / (S::lit(100.0) * m);
        Self {
            budget,
            initial_step,
            min_step: initial_step * S::lit(2f64.powi(-24)),
            threshold: Self::relaxed_threshold(inst),
            max_iters: PRACTICAL_MAX_ITERS,
            estimator: EstimatorConfig::fixed(PRACTICAL_SAMPLES, PRACTICAL_DELTA, seed),
            profile: Profile::Practical,
            floors: None,
        }
    }

    /// Step `eps^7 b / (312 m^6)` and error target `eps^6 / (64 n m^5)`.
    pub fn proof(inst: &Instance<S>, budget: S, n_voters: usize, seed: u64) -> Self {
        let m = inst.m();
        let eps = inst.epsilon.as_f64();
        let b = inst.budget.as_f64();
        let delta = EstimatorConfig::proof_delta(eps, n_voters.max(1), m);
        let mut p = Self::practical(inst, budget, seed);
        p.min_step = S::lit(eps.powi(7) * b / (312.0 * (m as f64).powi(6)));
        p.max_iters = usize::MAX;
        p.estimator = EstimatorConfig::auto(m, delta, 1.0 / (n_voters.max(1) * m * m) as f64, seed);
        p.profile = Profile::Proof;
        p
    }

    pub fn for_profile(
        profile: Profile,
        inst: &Instance<S>,
        budget: S,
        n_voters: usize,
        seed: u64,
    ) -> Self {
        match profile {
            Profile::Proof => Self::proof(inst, budget, n_voters, seed),
            Profile::Practical => Self::practical(inst, budget, seed),
        }
    }

    pub fn relaxed_threshold(inst: &Instance<S>) -> S {
        S::lit(3.0) * inst.epsilon / (S::lit(4.0) * inst.budget)
    }

    pub fn seed(&self) -> u64 {
        self.estimator.seed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NwResult<S> {
    pub x: FractionalAllocation<S>,
    /// Objective at the start and after every accepted swap.
    pub phi_trace: Vec<S>,
    /// Recomputed large-candidate cost at each trace point.
    pub cost_trace: Vec<S>,
    /// Loop iterations, counting step halvings.
    pub iters: usize,
    pub accepted: usize,
    pub converged: bool,
    pub final_step: S,
    /// Largest relaxed gradient gap among pairs admissible at the final step
    /// (negative infinity when no pair is admissible).
    pub residual_gap: S,
    pub budget: S,
    pub profile: Profile,
    /// Whether every utility was computed exactly.
    pub exact: bool,
}

impl<S: Scalar> NwResult<S> {
    pub fn phi(&self) -> S {
        *self
            .phi_trace
            .last()
            .expect("trace starts with the initial objective")
    }
}

/// Standard floors: `B eps / sum_{C_l} s_j` on large candidates, 1 on small.
pub fn default_floors<S: Scalar>(inst: &Instance<S>, budget: S) -> Vec<S> {
    let part = inst.partition();
    let large_size: S = part.large.iter().map(|j| inst.size(j)).sum();
    (0..inst.m())
        .map(|j| {
            if part.small.contains(j) {
                S::one()
            } else {
                (budget * inst.epsilon / large_size).min(S::one())
            }
        })
        .collect()
}

/// Deterministic start point: on `C_l`, `x_j = f_j + t (1 - f_j)` with the
/// single `t` that makes the large-candidate cost exactly `B`.
pub fn initial_allocation<S: Scalar>(
    inst: &Instance<S>,
    budget: S,
    floors: &[S],
) -> Result<FractionalAllocation<S>> {
    let m = inst.m();
    if floors.len() != m {
        return Err(Error::InvalidParams("floor vector has wrong length".into()));
    }
    let part = inst.partition();
    let sizes = inst.sizes();
    let floor_cost: S = part.large.iter().map(|j| sizes[j] * floors[j]).sum();
    let full_cost: S = part.large.iter().map(|j| sizes[j]).sum();
    let tol = S::tolerance() * (S::one() + budget);
    if floor_cost > budget + tol {
        return Err(Error::Infeasible(format!(
            "floors cost {floor_cost} exceeds budget {budget}"
        )));
    }
    if budget > full_cost + tol {
        return Err(Error::Infeasible(format!(
            "budget {budget} exceeds total large-candidate size {full_cost}"
        )));
    }
    let headroom = full_cost - floor_cost;
    let t = if headroom > S::zero() {
        ((budget - floor_cost) / headroom)
            .max(S::zero())
            .min(S::one())
    } else {
        S::zero()
    };
    let mut x = vec![S::one(); m];
    for j in part.large.iter() {
        x[j] = floors[j] + t * (S::one() - floors[j]);
    }
    let mut floors = floors.to_vec();
    for j in part.small.iter() {
        floors[j] = S::one();
    }
    FractionalAllocation::new(x, floors, sizes, part.large)
}

fn phi_of<S: Scalar>(utilities: &[S]) -> S {
    if utilities.iter().any(|&u| u <= S::zero()) {
        return S::neg_infinity();
    }
    utilities.iter().map(|u| u.ln()).sum()
}

/// Steepest admissible pair `(j, l)` at `step` and its relaxed gap
/// `g_j/s_j - g_l/s_l`. Ties go to the lowest index.
fn steepest_pair<S: Scalar>(
    x: &FractionalAllocation<S>,
    grad: &[S],
    step: S,
) -> Option<(usize, usize, S)> {
    let sizes = x.sizes();
    let mut up: Option<(usize, S)> = None;
    let mut down: Option<(usize, S)> = None;
    for j in x.large().iter() {
        let r = grad[j] / sizes[j];
        let move_by = step / sizes[j];
        if x.x()[j] <= S::one() - move_by && up.map_or(true, |(_, best)| r > best) {
            up = Some((j, r));
        }
        if x.x()[j] >= x.floors()[j] + move_by && down.map_or(true, |(_, best)| r < best) {
            down = Some((j, r));
        }
    }
    match (up, down) {
        (Some((j, rj)), Some((l, rl))) if j != l => Some((j, l, rj - rl)),
        _ => None,
    }
}

/// Runs the local search over the voters `w` (indices into `inst.voters`).
pub fn nw_local_search<S: Scalar>(
    inst: &Instance<S>,
    w: &[usize],
    params: &NwParams<S>,
) -> Result<NwResult<S>> {
    let eval = Multilinear::new(inst, params.estimator)?;
    nw_local_search_with(&eval, w, params)
}

/// As [`nw_local_search`], reusing a prepared evaluator.
pub fn nw_local_search_with<S: Scalar>(
    eval: &Multilinear<'_, S>,
    w: &[usize],
    params: &NwParams<S>,
) -> Result<NwResult<S>> {
    let inst = eval.instance();
    if w.is_empty() {
        return Err(Error::InvalidParams(
            "local search needs at least one voter".into(),
        ));
    }
    let budget = params.budget;
    let lo = inst.epsilon * inst.budget / (S::lit(5.0) * S::lit(inst.m() as f64));
    let tol = S::tolerance() * (S::one() + inst.budget);
    if !(budget >= lo - tol && budget <= inst.budget + tol) {
        return Err(Error::InvalidParams(format!(
            "local search budget {budget} outside [{lo}, {}]",
            inst.budget
        )));
    }
    if params.profile == Profile::Proof {
        if let Some(&i) = w.iter().find(|&&i| eval.method(i) == Method::Sampled) {
            return Err(Error::InvalidParams(format!(
                "proof profile needs exact utilities, but voter `{}` would be sampled with H = {}",
                inst.voters[i].id, params.estimator.samples_h
            )));
        }
    }
    let exact = eval.all_exact(w);
    let floors = match &params.floors {
        Some(f) => f.clone(),
        None => default_floors(inst, budget),
    };

    let part = inst.partition();
    let large_size: S = part.large.iter().map(|j| inst.size(j)).sum();
    if large_size <= budget {
        // Everything fits: the whole box corner is the optimum.
        let sizes = inst.sizes();
        let x = FractionalAllocation::new(
            vec![S::one(); inst.m()],
            vec![S::one(); inst.m()],
            sizes,
            part.large,
        )?;
        let phi = phi_of(&eval.values(w, x.x(), params.seed()));
        return Ok(NwResult {
            cost_trace: vec![x.recompute_cost_large()],
            x,
            phi_trace: vec![phi],
            iters: 0,
            accepted: 0,
            converged: true,
            final_step: params.initial_step,
            residual_gap: S::neg_infinity(),
            budget,
            profile: params.profile,
            exact,
        });
    }

    let mut x = initial_allocation(inst, budget, &floors)?;
    let mut seed = derive_seed(params.seed(), 0);
    let mut bundle = eval.bundle(w, x.x(), x.large(), seed)?;
    let mut phi = phi_of(&bundle.utilities);
    let mut phi_trace = vec![phi];
    let mut cost_trace = vec![x.recompute_cost_large()];
    let mut step = params.initial_step;
    let mut iters = 0;
    let mut accepted = 0;
    let mut converged = false;

    while iters < params.max_iters {
        iters += 1;
        let improved = match steepest_pair(&x, &bundle.grad, step) {
            Some((j, l, gap)) if gap > params.threshold => {
                let mut cand = x.clone();
                cand.shift(j, l, step);
                let next = phi_of(&eval.values(w, cand.x(), seed));
                if next > phi {
                    x = cand;
                    phi = next;
                    true
                } else {
                    false
                }
            }
            _ => false,
        };
        if improved {
            accepted += 1;
            phi_trace.push(phi);
            cost_trace.push(x.recompute_cost_large());
            seed = derive_seed(params.seed(), accepted as u64);
            bundle = eval.bundle(w, x.x(), x.large(), seed)?;
            phi = phi_of(&bundle.utilities);
            if exact {
                *phi_trace.last_mut().expect("nonempty") = phi;
            }
        } else {
            let half = step / S::lit(2.0);
            if half < params.min_step {
                converged = true;
                break;
            }
            step = half;
        }
    }

    let residual_gap = steepest_pair(&x, &bundle.grad, step)
        .map(|(_, _, g)| g)
        .unwrap_or(S::neg_infinity());
    Ok(NwResult {
        x,
        phi_trace,
        cost_trace,
        iters,
        accepted,
        converged,
        final_step: step,
        residual_gap,
        budget,
        profile: params.profile,
        exact,
    })
}

/// Outcome of checking the coalition-size bound for one probe allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoalitionBoundReport {
    /// `|S|` with `S = {i in W : U_i(y) > theta U_i(x)}`.
    pub improving: usize,
    /// `|W| Cost(y) / (B (1 - eps) (theta - 1 - 2 eps))`.
    pub bound: f64,
    pub cost_y: f64,
    pub pass: bool,
    pub exact: bool,
}

/// Counts the voters whose utility at `y` beats `theta` times their utility
/// at the local optimum and compares with the coalition-size bound. Sampled
/// utilities only count a voter when the gap exceeds the estimator error.
pub fn check_coalition_bound<S: Scalar>(
    eval: &Multilinear<'_, S>,
    result: &NwResult<S>,
    w: &[usize],
    y: &[S],
    theta: S,
    seed: u64,
) -> Result<CoalitionBoundReport> {
    let inst = eval.instance();
    let eps = inst.epsilon;
    let two = S::lit(2.0);
    if !(theta > S::one() + two * eps) {
        return Err(Error::InvalidParams(format!(
            "theta {theta} must exceed 1 + 2 eps"
        )));
    }
    if y.len() != inst.m() || y.iter().any(|&v| !(v >= S::zero() && v <= S::one())) {
        return Err(Error::InvalidParams(
            "probe allocation must lie in [0, 1]^m".into(),
        ));
    }
    let cost_y: S = y.iter().zip(inst.sizes()).map(|(&v, s)| v * s).sum();
    if cost_y > inst.budget + S::tolerance() {
        return Err(Error::InvalidParams(format!(
            "probe cost {cost_y} exceeds budget {}",
            inst.budget
        )));
    }
    let ux = eval.values(w, result.x.x(), seed);
    let uy = eval.values(w, y, derive_seed(seed, 1));
    let exact = eval.all_exact(w);
    let margin = if exact {
        S::zero()
    } else {
        S::lit(eval.config().delta)
    };
    let improving = ux
        .iter()
        .zip(&uy)
        .filter(|&(&a, &b)| b - margin > theta * (a + margin))
        .count();
    let bound = S::lit(w.len() as f64) * cost_y
        / (result.budget * (S::one() - eps) * (theta - S::one() - two * eps));
    let pass = improving == 0 || S::lit(improving as f64) < bound;
    Ok(CoalitionBoundReport {
        improving,
        bound: bound.as_f64(),
        cost_y: cost_y.as_f64(),
        pass,
        exact,
    })
}

/// Set of candidates with positive mass in `x` (helper for reports).
pub fn support<S: Scalar>(x: &[S]) -> CandidateSet {
    CandidateSet::from_indices(x.len(), (0..x.len()).filter(|&j| x[j] > S::zero()))
}
