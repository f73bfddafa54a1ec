use alphacore::generators::{
    lb_default_z, lb_general, lb_submodular, lb_submodular_gap, random_additive, random_coverage,
    SizeDist, WeightDist,
};
use alphacore::verify::{
    gadget_structure, min_alpha_full, min_alpha_profile, sweep_committee_profiles,
};
use alphacore::{min_alpha, CandidateSet, Enumeration, Instance, InstanceF64, VerifyOptions};
use proptest::prelude::*;

fn inst(f: alphacore::InstanceFile) -> InstanceF64 {
    Instance::from_file(&f).unwrap()
}

fn committee(m: usize, mask: u64) -> CandidateSet {
    CandidateSet::from_indices(m, (0..m).filter(|&j| mask >> j & 1 == 1))
}

const STRICT: VerifyOptions = VerifyOptions {
    strict_additament: true,
};

#[test]
fn profile_matches_full_on_scaled_gadgets() {
    let instances = [
        inst(lb_submodular(lb_default_z(), 2).unwrap()),
        inst(lb_submodular(0.4, 2).unwrap()),
        inst(lb_general(10.0, 2).unwrap()),
    ];
    for inst in &instances {
        let m = inst.m();
        for mask in [
            0u64,
            0b11,
            0b1010_1010_1010,
            0b11_0011,
            0b1111_1100_0000,
            0b0101_0101_0000,
        ] {
            let o = committee(m, mask);
            if inst.cost(&o) > inst.budget {
                continue;
            }
            for opts in [VerifyOptions::default(), STRICT] {
                let full = min_alpha_full(inst, &o, opts).unwrap();
                let prof = min_alpha_profile(inst, &o, opts).unwrap();
                assert_eq!(
                    full.min_alpha, prof.min_alpha,
                    "mask {mask:b} strict {}",
                    opts.strict_additament
                );
                if let Some(c) = &prof.certificate {
                    assert!(c.blocks(inst, &o, prof.min_alpha * (1.0 - 1e-9), opts));
                }
            }
        }
    }
}

#[test]
fn profile_count_for_default_gadgets() {
    let inst = inst(lb_submodular(lb_default_z(), 5).unwrap());
    let gs = gadget_structure(&inst).unwrap();
    assert_eq!(gs.profile_count(), 46_656);
}

#[test]
fn sweep_reaches_the_gap() {
    let inst = inst(lb_submodular(lb_default_z(), 5).unwrap());
    let r = sweep_committee_profiles(&inst).unwrap();
    assert_eq!(r.total_profiles, 46_656);
    assert!(r.min_alpha >= lb_submodular_gap() - 1e-9, "{}", r.min_alpha);
}

#[test]
fn profile_refuses_non_gadget_instances() {
    let inst = inst(random_additive(3, 4, 2.0, WeightDist::Uniform, SizeDist::Unit, 0).unwrap());
    assert!(min_alpha(
        &inst,
        &CandidateSet::empty(4),
        Enumeration::Profile,
        VerifyOptions::default()
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certificates_recheck(seed in 0u64..10_000, mask in 0u64..1024, coverage in any::<bool>()) {
        let f = if coverage {
            random_coverage(4, 8, 6, 0.3, 3.0, seed).unwrap()
        } else {
            random_additive(4, 8, 3.0, WeightDist::Sparse, SizeDist::Integer { max: 2 }, seed).unwrap()
        };
        let inst = inst(f);
        let o = committee(inst.m(), mask);
        for opts in [VerifyOptions::default(), STRICT] {
            let r = min_alpha_full(&inst, &o, opts).unwrap();
            if let Some(c) = &r.certificate {
                prop_assert!(r.min_alpha > 1.0);
                prop_assert!(c.cost_t <= c.endowment + 1e-9);
                if r.min_alpha.is_finite() {
                    prop_assert!(c.blocks(&inst, &o, r.min_alpha * (1.0 - 1e-9), opts));
                    prop_assert!(!c.blocks(&inst, &o, r.min_alpha * (1.0 + 1e-9), opts));
                } else {
                    prop_assert!(c.blocks(&inst, &o, 1e300, opts));
                }
            } else {
                prop_assert!(r.min_alpha <= 1.0);
            }
        }
    }

    #[test]
    fn min_alpha_monotone_in_committee(seed in 0u64..10_000, mask in 0u64..1024, extra in 0usize..10) {
        let inst = inst(random_coverage(4, 10, 6, 0.3, 3.0, seed).unwrap());
        let o = committee(inst.m(), mask);
        let bigger = o.with(extra);
        let a = min_alpha_full(&inst, &o, VerifyOptions::default()).unwrap().min_alpha;
        let b = min_alpha_full(&inst, &bigger, VerifyOptions::default()).unwrap().min_alpha;
        prop_assert!(b <= a + 1e-9 || a.is_infinite(), "{b} > {a}");
    }

    #[test]
    fn strict_never_below_loose(seed in 0u64..10_000, mask in 0u64..256) {
        let inst = inst(random_additive(3, 8, 3.0, WeightDist::Uniform, SizeDist::Unit, seed).unwrap());
        let o = committee(inst.m(), mask);
        let loose = min_alpha_full(&inst, &o, VerifyOptions::default()).unwrap().min_alpha;
        let strict = min_alpha_full(&inst, &o, STRICT).unwrap().min_alpha;
        prop_assert!(strict >= loose - 1e-12);
    }
}
