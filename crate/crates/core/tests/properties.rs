use alphacore::generators::{
    lb_general, lb_submodular, random_additive, random_coverage, SizeDist, WeightDist,
};
use alphacore::nw_search::{default_floors, initial_allocation};
use alphacore::rounding::{round_dependent_traced, sample_independent};
use alphacore::{
    nw_local_search, solve, CandidateSet, DriverParams, Instance, InstanceF64, InstanceFile,
    NwParams, Voter,
};
use proptest::prelude::*;

fn load(f: &InstanceFile) -> InstanceF64 {
    Instance::from_file(f).unwrap()
}

/// One instance of each oracle family.
fn family(kind: u8, seed: u64) -> InstanceF64 {
    match kind % 4 {
        0 => load(
            &random_additive(3, 8, 3.0, WeightDist::Exponential, SizeDist::Unit, seed).unwrap(),
        ),
        1 => load(&random_coverage(3, 8, 7, 0.3, 3.0, seed).unwrap()),
        2 => load(&lb_submodular(0.1 + (seed % 8) as f64 / 10.0, 2).unwrap()),
        _ => load(&lb_general(1.0 + (seed % 50) as f64, 2).unwrap()),
    }
}

/// A random chain of growing committees built from a permutation.
fn chain(m: usize, perm: &[usize]) -> Vec<CandidateSet> {
    let mut t = CandidateSet::empty(m);
    let mut out = vec![t.clone()];
    for &j in perm.iter().take(m) {
        t.insert(j % m);
        out.push(t.clone());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracles_are_monotone(kind in 0u8..4, seed in 0u64..1000, perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let inst = family(kind, seed);
        let m = inst.m();
        let perm: Vec<usize> = perm.into_iter().filter(|&j| j < m).collect();
        for v in &inst.voters {
            let c = chain(m, &perm);
            for pair in c.windows(2) {
                prop_assert!(v.oracle.value(&pair[0]) <= v.oracle.value(&pair[1]));
            }
        }
    }

    #[test]
    fn submodular_oracles_have_diminishing_returns(kind in 0u8..3, seed in 0u64..1000, small in 0u64..4096, extra in 0u64..4096, t in 0usize..12) {
        let inst = family(kind, seed);
        let m = inst.m();
        let t = t % m;
        let a = CandidateSet::from_indices(m, (0..m).filter(|&j| small >> j & 1 == 1 && j != t));
        let mut b = a.clone();
        for j in (0..m).filter(|&j| extra >> j & 1 == 1 && j != t) {
            b.insert(j);
        }
        for v in &inst.voters {
            let gain_a = v.oracle.value(&a.with(t)) - v.oracle.value(&a);
            let gain_b = v.oracle.value(&b.with(t)) - v.oracle.value(&b);
            prop_assert!(gain_a >= gain_b - 1e-12, "{gain_a} < {gain_b}");
        }
    }

    #[test]
    fn normalization_is_idempotent(kind in 0u8..2, seed in 0u64..1000, mask in 0u64..256) {
        let inst = family(kind, seed);
        let m = inst.m();
        let t = CandidateSet::from_indices(m, (0..m).filter(|&j| mask >> j & 1 == 1));
        for v in &inst.voters {
            let once = Voter::new(v.id.clone(), v.normalized_oracle().unwrap(), m);
            prop_assert!((once.u_max - 1.0).abs() < 1e-12);
            prop_assert!((once.evaluate(&t) - v.evaluate(&t)).abs() < 1e-12);
            let twice = Voter::new(v.id.clone(), once.normalized_oracle().unwrap(), m);
            prop_assert!((twice.evaluate(&t) - once.evaluate(&t)).abs() < 1e-12);
        }
    }

    #[test]
    fn small_candidates_cost_at_most_eps_b(seed in 0u64..1000, max in 1u32..40, b in 5.0f64..200.0) {
        let inst = load(&random_additive(2, 30, b, WeightDist::Uniform, SizeDist::Integer { max }, seed).unwrap());
        let part = inst.partition();
        let small: f64 = part.small.iter().map(|j| inst.size(j)).sum();
        prop_assert!(small <= inst.epsilon * inst.budget + 1e-9);
        prop_assert_eq!(part.small.count() + part.large.count(), inst.m());
    }

    #[test]
    fn local_search_stays_in_box_and_budget(seed in 0u64..1000, coverage in any::<bool>(), frac in 0.2f64..1.0) {
        let inst = if coverage {
            load(&random_coverage(3, 7, 6, 0.3, 3.0, seed).unwrap())
        } else {
            load(&random_additive(3, 7, 3.0, WeightDist::Uniform, SizeDist::Integer { max: 2 }, seed).unwrap())
        };
        let budget = inst.budget * frac;
        let w: Vec<usize> = (0..inst.n()).collect();
        let mut params = NwParams::practical(&inst, budget, seed);
        params.max_iters = 2000;
        let r = nw_local_search(&inst, &w, &params).unwrap();
        let x = r.x.x();
        let floors = default_floors(&inst, budget);
        for (j, &v) in x.iter().enumerate() {
            prop_assert!(v >= floors[j] - 1e-12 && v <= 1.0 + 1e-12);
        }
        let large: f64 = inst.partition().large.iter().map(|j| inst.size(j)).sum();
        for c in &r.cost_trace {
            prop_assert!((c - budget.min(large)).abs() < 1e-9);
        }
        let x0 = initial_allocation(&inst, budget, &floors);
        if budget < large {
            prop_assert!((x0.unwrap().cost_large() - budget).abs() < 1e-9);
        }
    }

    #[test]
    fn pipage_keeps_cost(xs in proptest::collection::vec(0.0f64..=1.0, 2..10), seed in any::<u64>()) {
        let sizes: Vec<f64> = (0..xs.len()).map(|j| 1.0 + (j % 3) as f64 * 0.5).collect();
        let tr = round_dependent_traced(&xs, &sizes, seed);
        for c in &tr.costs {
            prop_assert!((c - tr.costs[0]).abs() < 1e-9);
        }
        prop_assert!(tr.x.iter().filter(|&&v| v > 0.0 && v < 1.0).count() <= 1);
    }

    #[test]
    fn independent_rounding_respects_affordability(seed in any::<u64>(), kb in 0.5f64..3.0) {
        let inst = load(&random_additive(2, 8, 6.0, WeightDist::Uniform, SizeDist::Integer { max: 3 }, 7).unwrap());
        let c = sample_independent(&inst, &[0.7; 8], kb, seed);
        let part = inst.partition();
        for j in c.members.iter() {
            prop_assert!(part.small.contains(j) || inst.size(j) <= kb);
        }
    }
}

#[test]
fn solve_is_deterministic_and_within_budget() {
    for seed in 0..5 {
        let inst = load(&random_coverage(4, 9, 8, 0.3, 4.0, seed).unwrap());
        let a = solve(&inst, &DriverParams::submodular(seed)).unwrap();
        let b = solve(&inst, &DriverParams::submodular(seed)).unwrap();
        assert_eq!(a.report.to_json_pretty(), b.report.to_json_pretty());
        assert!(a.report.total_cost <= inst.budget + 1e-9);
        assert_eq!(a.report.voters.len(), inst.n());
    }
}

#[test]
fn general_gadgets_are_not_submodular() {
    let inst = load(&lb_general(5.0, 2).unwrap());
    let v = &inst.voters[0];
    let fav: Vec<usize> = vec![0, 1];
    let one = CandidateSet::from_indices(12, [fav[0]]);
    let gain_empty = v.oracle.value(&CandidateSet::from_indices(12, [fav[1]]));
    let gain_one = v.oracle.value(&one.with(fav[1])) - v.oracle.value(&one);
    assert!(gain_one > gain_empty);
}
