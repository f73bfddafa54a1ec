//! Iterative rounding driver.
//!
//! Starting from `b_0 = (1 - eps)(1 - omega) b`, each round solves the Nash
//! welfare local search for the remaining voters at budget `kappa b_t`,
//! rounds the result, removes the `gamma`-satisfied voters and shrinks the
//! budget to `b_{t+1} = omega b_t`, while `b_t >= eps b / m`. The committee is
//! the small candidates plus every round's realization.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::multilinear::{EstimatorConfig, Method, Multilinear};
use crate::nw_search::{
    nw_local_search_with, NwParams, Profile, PRACTICAL_DELTA, PRACTICAL_SAMPLES,
};
use crate::rng::derive_seed;
use crate::rounding::{
    acceptance_threshold, attempt_cap, best_additament, beta_additive, beta_submodular,
    round_dependent, round_until_accepted, sample_independent, Committee,
};
use crate::scalar::Scalar;
use crate::serde_util::extended_f64;
use crate::set::CandidateSet;

/// Headline guarantee for submodular utilities.
pub const SUBMODULAR_GUARANTEE: f64 = 67.37;
/// Headline guarantee for additive utilities (Lindahl-based analysis).
pub const ADDITIVE_GUARANTEE: f64 = 9.27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Submodular,
    Additive,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "submodular" => Ok(Preset::Submodular),
            "additive" => Ok(Preset::Additive),
            other => Err(Error::InvalidParams(format!("unknown preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverParams {
    pub preset: Preset,
    pub omega: f64,
    pub gamma: f64,
    pub kappa: f64,
    /// Overrides the instance's epsilon when set.
    pub eps: Option<f64>,
    pub profile: Profile,
    pub seed: u64,
    /// Overrides the sampled estimator's committee count.
    pub samples: Option<usize>,
}

impl DriverParams {
    /// `(omega, gamma, kappa) = (0.23, 7.435, 0.21)`.
    pub fn submodular(seed: u64) -> Self {
        Self {
            preset: Preset::Submodular,
            omega: 0.23,
            gamma: 7.435,
            kappa: 0.21,
            eps: None,
            profile: Profile::Practical,
            seed,
            samples: None,
        }
    }

    /// `(omega, gamma) = (0.15, 6.7)` with `kappa = 1` and dependent rounding.
    pub fn additive(seed: u64) -> Self {
        Self {
            preset: Preset::Additive,
            omega: 0.15,
            gamma: 6.7,
            kappa: 1.0,
            eps: None,
            profile: Profile::Practical,
            seed,
            samples: None,
        }
    }

    pub fn for_preset(preset: Preset, seed: u64) -> Self {
        match preset {
            Preset::Submodular => Self::submodular(seed),
            Preset::Additive => Self::additive(seed),
        }
    }

    pub fn beta(&self) -> f64 {
        match self.preset {
            Preset::Submodular => beta_submodular(self.kappa, self.gamma),
            Preset::Additive => beta_additive(self.gamma),
        }
    }

    /// The approximation bound these parameters certify at `eps`.
    pub fn alpha_bound(&self, eps: f64) -> Result<f64> {
        match self.preset {
            Preset::Submodular => alpha_formula(self.omega, self.gamma, self.kappa, eps),
            Preset::Additive => alpha_additive(self.omega, self.gamma, eps),
        }
    }

    pub fn validate(&self, eps: f64) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::InvalidParams(format!(
                "omega {} must lie in (0, 1)",
                self.omega
            )));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "kappa {} must lie in (0, 1]",
                self.kappa
            )));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidParams(format!(
                "gamma {} must exceed 1",
                self.gamma
            )));
        }
        if self.preset == Preset::Additive && self.kappa != 1.0 {
            return Err(Error::InvalidParams(
                "the additive preset requires kappa = 1".into(),
            ));
        }
        self.alpha_bound(eps).map(|_| ())
    }
}

/// `omega gamma / (kappa (1 - omega)(omega - beta - eps)(1 - eps)^2) + (1 + 2 eps) gamma`
/// with `beta = (kappa e^{1-kappa})^{1/kappa} + (gamma - 1) e^{2-gamma}`.
pub fn alpha_formula(omega: f64, gamma: f64, kappa: f64, eps: f64) -> Result<f64> {
    let beta = beta_submodular(kappa, gamma);
    let gap = omega - beta - eps;
    if !(gap > 0.0) || !(omega < 1.0) || !(kappa > 0.0) || !(eps < 1.0) {
        return Err(Error::InvalidParams(format!(
            "alpha bound undefined: omega {omega} must exceed beta + eps = {}",
            beta + eps
        )));
    }
    Ok(
        omega * gamma / (kappa * (1.0 - omega) * gap * (1.0 - eps).powi(2))
            + (1.0 + 2.0 * eps) * gamma,
    )
}

/// `omega gamma / ((1 - omega)(omega - gamma e^{1-gamma}))`, the additive bound.
pub fn alpha_additive_closed_form(omega: f64, gamma: f64) -> Result<f64> {
    alpha_additive(omega, gamma, 0.0)
}

/// Additive bound with `eps` slack in the denominator (equal to the closed
/// form at `eps = 0`).
pub fn alpha_additive(omega: f64, gamma: f64, eps: f64) -> Result<f64> {
    let gap = omega - beta_additive(gamma) - eps;
    if !(gap > 0.0) || !(omega < 1.0) {
        return Err(Error::InvalidParams(format!(
            "additive alpha bound undefined: omega {omega} must exceed gamma e^(1-gamma) + eps"
        )));
    }
    Ok(omega * gamma / ((1.0 - omega) * gap))
}

/// Rounds the loop can run: `ceil(log_{1/omega}(m (1-eps)(1-omega) / eps)) + 1`.
pub fn max_rounds(m: usize, omega: f64, eps: f64) -> usize {
    let ratio = m as f64 * (1.0 - eps) * (1.0 - omega) / eps;
    (ratio.ln() / (1.0 / omega).ln()).ceil().max(0.0) as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub b_t: f64,
    /// Budget handed to the local search, `kappa b_t`.
    pub nw_budget: f64,
    pub voters_remaining: usize,
    pub voters_satisfied: usize,
    pub committee: Vec<String>,
    pub leftover: Option<String>,
    pub accepted_attempt: usize,
    pub required_satisfied: usize,
    pub nw_iterations: usize,
    pub nw_swaps: usize,
    pub nw_converged: bool,
    pub exact_utilities: bool,
    pub round_seed: u64,
    #[serde(skip)]
    pub phi_trace: Vec<f64>,
    #[serde(skip)]
    pub cost_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoterOutcome {
    pub voter: String,
    /// Round in which the voter was satisfied; `None` for voters still
    /// present when the loop ended.
    pub round: Option<usize>,
    pub additament: Option<String>,
    #[serde(serialize_with = "extended_f64")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub samples_h: usize,
    pub delta: f64,
    pub enumerate_up_to: usize,
    pub closed_form_voters: usize,
    pub enumerated_voters: usize,
    pub sampled_voters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub committee: Vec<String>,
    pub total_cost: f64,
    pub budget: f64,
    pub epsilon: f64,
    pub n: usize,
    pub m: usize,
    pub params: DriverParams,
    pub estimator: EstimatorSummary,
    pub beta: f64,
    pub rounding_search: &'static str,
    pub small_candidates: Vec<String>,
    pub rounds: Vec<RoundRecord>,
    pub voters: Vec<VoterOutcome>,
    pub alpha_guarantee: f64,
    pub alpha_guarantee_label: String,
    /// The bound evaluated at this run's epsilon.
    pub alpha_formula_value: f64,
    pub dropped_candidates: Vec<String>,
    pub dropped_voters: Vec<String>,
}

impl SolveReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Result of a solve: the committee as a set plus the serializable report.
#[derive(Debug, Clone)]
pub struct Solution {
    pub committee: CandidateSet,
    pub report: SolveReport,
}

/// Runs the submodular preset (independent rounding).
pub fn solve_submodular<S: Scalar>(inst: &Instance<S>, params: &DriverParams) -> Result<Solution> {
    if params.preset != Preset::Submodular {
        return Err(Error::InvalidParams(
            "solve_submodular needs submodular parameters".into(),
        ));
    }
    solve(inst, params)
}

/// Runs the additive preset (dependent rounding); every voter must be additive.
pub fn solve_additive<S: Scalar>(inst: &Instance<S>, params: &DriverParams) -> Result<Solution> {
    if params.preset != Preset::Additive {
        return Err(Error::InvalidParams(
            "solve_additive needs additive parameters".into(),
        ));
    }
    if !inst.all_additive() {
        return Err(Error::InvalidParams(
            "the additive preset requires additive voters".into(),
        ));
    }
    solve(inst, params)
}

/// Dispatches on `params.preset`.
pub fn solve<S: Scalar>(inst: &Instance<S>, params: &DriverParams) -> Result<Solution> {
    let mut inst = inst.clone();
    if let Some(eps) = params.eps {
        if !(eps > 0.0 && eps < 0.05) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, 1/20), got {eps}"
            )));
        }
        inst.epsilon = S::lit(eps);
    }
    let inst = &inst;
    let eps = inst.epsilon.as_f64();
    params.validate(eps)?;
    if params.preset == Preset::Additive && !inst.all_additive() {
        return Err(Error::InvalidParams(
            "the additive preset requires additive voters".into(),
        ));
    }

    let m = inst.m();
    let b = inst.budget.as_f64();
    let cfg = match params.profile {
        Profile::Practical => EstimatorConfig::fixed(
            params.samples.unwrap_or(PRACTICAL_SAMPLES),
            PRACTICAL_DELTA,
            params.seed,
        ),
        Profile::Proof => {
            let delta = EstimatorConfig::proof_delta(eps, inst.n(), m);
            let mut c =
                EstimatorConfig::auto(m, delta, 1.0 / (inst.n() * m * m) as f64, params.seed);
            if let Some(h) = params.samples {
                c.samples_h = h;
            }
            c
        }
    };
    let eval = Multilinear::new(inst, cfg)?;
    let part = inst.partition();
    let beta = params.beta();
    let mut committee = part.small.clone();
    let mut rounds = Vec::new();
    let mut outcomes: Vec<Option<VoterOutcome>> = vec![None; inst.n()];
    let mut remaining: Vec<usize> = (0..inst.n()).collect();

    if inst.fits_entirely() {
        committee = CandidateSet::full(m);
    } else {
        let mut b_t = (1.0 - eps) * (1.0 - params.omega) * b;
        let guard = eps / m as f64 * b;
        let mut t = 0;
        while b_t >= guard && !remaining.is_empty() {
            let nw_budget = params.kappa * b_t;
            if nw_budget < eps * b / (5.0 * m as f64) * (1.0 - 1e-12) {
                return Err(Error::InvalidParams(format!(
                    "round {t}: local search budget {nw_budget} below eps b / (5 m)"
                )));
            }
            let round_seed = derive_seed(params.seed, t as u64);
            let mut nw_params = NwParams::for_profile(
                params.profile,
                inst,
                S::lit(nw_budget),
                remaining.len(),
                derive_seed(round_seed, 0),
            );
            nw_params.estimator = cfg.with_seed(derive_seed(round_seed, 0));
            let nw = nw_local_search_with(&eval, &remaining, &nw_params)?;
            if !nw.converged {
                return Err(Error::NotConverged {
                    round: t,
                    iterations: nw.iters,
                });
            }
            let x = nw.x.x().to_vec();
            let utilities = eval.values(&remaining, &x, derive_seed(round_seed, 2));

            let accepted = match params.preset {
                Preset::Submodular => round_until_accepted(
                    inst,
                    &remaining,
                    &utilities,
                    S::lit(b_t),
                    params.gamma,
                    beta,
                    attempt_cap(eps),
                    derive_seed(round_seed, 1),
                    t,
                    |s| sample_independent(inst, &x, S::lit(nw_budget), s),
                )?,
                Preset::Additive => {
                    let sizes = inst.sizes();
                    let large_x: Vec<S> = (0..m)
                        .map(|j| {
                            if part.large.contains(j) {
                                x[j]
                            } else {
                                S::zero()
                            }
                        })
                        .collect();
                    round_until_accepted(
                        inst,
                        &remaining,
                        &utilities,
                        S::lit(b_t),
                        params.gamma,
                        beta,
                        attempt_cap(eps),
                        derive_seed(round_seed, 1),
                        t,
                        |s| {
                            let mut c = round_dependent(&large_x, &sizes, s);
                            c.members.union_with(&part.small);
                            c
                        },
                    )?
                }
            };
            let Committee {
                members,
                fractional_leftover,
            } = &accepted.committee;
            committee.union_with(members);

            let mut satisfied = 0;
            for r in &accepted.records {
                if r.satisfied {
                    satisfied += 1;
                    outcomes[r.voter] = Some(VoterOutcome {
                        voter: r.voter_id.clone(),
                        round: Some(t),
                        additament: r.witness_additament.map(|q| inst.candidates[q].id.clone()),
                        ratio: r.ratio,
                    });
                }
            }
            let before = remaining.len();
            remaining.retain(|&i| outcomes[i].is_none());

            rounds.push(RoundRecord {
                t,
                b_t,
                nw_budget,
                voters_remaining: before,
                voters_satisfied: satisfied,
                committee: inst.ids_of(members),
                leftover: fractional_leftover.map(|(j, _)| inst.candidates[j].id.clone()),
                accepted_attempt: accepted.attempt,
                required_satisfied: acceptance_threshold(beta, eps, before),
                nw_iterations: nw.iters,
                nw_swaps: nw.accepted,
                nw_converged: nw.converged,
                exact_utilities: nw.exact,
                round_seed,
                phi_trace: nw.phi_trace.iter().map(|v| v.as_f64()).collect(),
                cost_trace: nw.cost_trace.iter().map(|v| v.as_f64()).collect(),
            });
            b_t *= params.omega;
            t += 1;
        }
    }

    // Voters left at the end are covered by their best single additament.
    for &i in &remaining {
        let (best, q) = best_additament(inst, i, &committee);
        outcomes[i] = Some(VoterOutcome {
            voter: inst.voters[i].id.clone(),
            round: None,
            additament: q.map(|q| inst.candidates[q].id.clone()),
            ratio: best.as_f64(),
        });
    }

    let total_cost = inst.cost(&committee).as_f64();
    if total_cost > b * (1.0 + 1e-12) {
        return Err(Error::BudgetViolation {
            cost: total_cost,
            budget: b,
        });
    }

    let (alpha_guarantee, alpha_guarantee_label) = match params.preset {
        Preset::Submodular => (SUBMODULAR_GUARANTEE, "67.37".to_string()),
        Preset::Additive => (
            ADDITIVE_GUARANTEE,
            "9.27 (Lindahl-based bound); this run's fractional solution is NW-based, so the verified alpha is empirical"
                .to_string(),
        ),
    };
    let methods: Vec<Method> = (0..inst.n()).map(|i| eval.method(i)).collect();
    let count = |m: Method| methods.iter().filter(|&&x| x == m).count();
    let report = SolveReport {
        committee: inst.ids_of(&committee),
        total_cost,
        budget: b,
        epsilon: eps,
        n: inst.n(),
        m,
        params: params.clone(),
        estimator: EstimatorSummary {
            samples_h: cfg.samples_h,
            delta: cfg.delta,
            enumerate_up_to: cfg.enumerate_up_to,
            closed_form_voters: count(Method::ClosedForm),
            enumerated_voters: count(Method::Enumerated),
            sampled_voters: count(Method::Sampled),
        },
        beta,
        rounding_search: "rejection sampling over seeded realizations",
        small_candidates: inst.ids_of(&part.small),
        rounds,
        voters: outcomes
            .into_iter()
            .map(|o| o.expect("every voter resolved"))
            .collect(),
        alpha_guarantee,
        alpha_guarantee_label,
        alpha_formula_value: params.alpha_bound(eps)?,
        dropped_candidates: inst.dropped_candidates.clone(),
        dropped_voters: inst.dropped_voters.clone(),
    };
    Ok(Solution { committee, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    #[test]
    fn headline_constants() {
        let a = alpha_formula(0.23, 7.435, 0.21, 0.0).unwrap();
        assert!(a < 67.37 && a > 67.3, "{a}");
        let c = alpha_additive_closed_form(0.15, 6.7).unwrap();
        assert!(c < 9.27 && c > 9.26, "{c}");
        assert!(alpha_formula(0.23, 7.435, 0.21, 0.01).unwrap() > a);
    }

    #[test]
    fn alpha_domain_error() {
        assert!(alpha_formula(0.04, 7.435, 0.21, 0.0).is_err());
        assert!(alpha_additive_closed_form(0.02, 6.7).is_err());
    }

    #[test]
    fn everything_small_selects_all() {
        let json = r#"{"budget": 1000, "epsilon": 0.01,
            "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}, {"id": "c", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"a": 1}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        let sol = solve(&inst, &DriverParams::submodular(0)).unwrap();
        assert_eq!(sol.report.committee.len(), 3);
        assert!(sol.report.rounds.is_empty());
    }

    #[test]
    fn one_candidate_at_budget() {
        let json = r#"{"budget": 2, "candidates": [{"id": "a", "size": 2}, {"id": "b", "size": 2}],
            "voters": [{"id": "v", "utility": {"type": "additive", "weights": {"a": 1}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        let sol = solve_additive(&inst, &DriverParams::additive(3)).unwrap();
        assert!(sol.report.total_cost <= 2.0);
        assert_eq!(sol.report.voters.len(), 1);
    }

    #[test]
    fn additive_rejects_coverage() {
        let json = r#"{"budget": 1, "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}],
            "voters": [{"id": "v", "utility": {"type": "coverage", "universe_weights": {"e": 1}, "covers": {"a": ["e"]}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        assert!(solve_additive(&inst, &DriverParams::additive(0)).is_err());
    }

    #[test]
    fn geometric_budgets_and_determinism() {
        let json = r#"{"budget": 2, "candidates": [{"id": "a", "size": 1}, {"id": "b", "size": 1}, {"id": "c", "size": 1}, {"id": "d", "size": 1}],
            "voters": [{"id": "v1", "utility": {"type": "additive", "weights": {"a": 4, "b": 3, "c": 1}}},
                       {"id": "v2", "utility": {"type": "additive", "weights": {"d": 2, "c": 1}}}]}"#;
        let inst: Instance<f64> = parse_instance(json).unwrap();
        let p = DriverParams::submodular(11);
        let a = solve(&inst, &p).unwrap();
        let b = solve(&inst, &p).unwrap();
        assert_eq!(a.report.to_json_pretty(), b.report.to_json_pretty());
        for r in &a.report.rounds {
            let expect = 0.99 * 0.77 * 0.23f64.powi(r.t as i32) * 2.0;
            assert!((r.b_t - expect).abs() < 1e-12);
        }
        assert!(a.report.rounds.len() <= max_rounds(4, 0.23, 0.01));
        assert!(a.report.total_cost <= 2.0);
    }
}
