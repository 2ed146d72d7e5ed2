use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;
use qtrit_core::classical_analysis::{
    admissible_count, evaluate_collapsed, evaluate_exhaustive, transcript_classes,
    Strategy as Table, StrategyProfile,
};
use qtrit_core::qudit_sim::{make_sum_class_state, permutation_gate, root_gate};
use qtrit_core::{
    grouped_sum, ramus, ramus_rounded, GroupedSumSpec, Probability, QuditState, RootBranch,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn strategy() -> impl Strategy<Value = Table> {
    prop::array::uniform6(0u8..3).prop_map(|t| Table::new(t).unwrap())
}

fn perm() -> impl Strategy<Value = [u8; 3]> {
    Just(vec![0u8, 1, 2])
        .prop_shuffle()
        .prop_map(|v| [v[0], v[1], v[2]])
}

fn branch() -> impl Strategy<Value = RootBranch> {
    (0u8..3, 0u8..3).prop_map(|(a, b)| RootBranch::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ramus_matches_direct_summation(n in 0u64..=60, p in 2u64..=9, q_seed in 0u64..9) {
        let spec = GroupedSumSpec::new(n, q_seed % p, p).unwrap();
        let exact = grouped_sum(spec);
        prop_assert_eq!(ramus_rounded(spec, 256).unwrap(), exact.clone());
        let exact_f: f64 = exact.to_string().parse().unwrap();
        prop_assert!((ramus(spec) - exact_f).abs() / exact_f.max(1.0) <= 1e-9);
    }

    #[test]
    fn every_root_branch_cubes_to_the_shift(b in branch()) {
        let u = root_gate(3, Some(b)).unwrap();
        prop_assert!(u.unitarity_deviation() <= 1e-10);
        prop_assert!(u.pow(3).max_abs_diff(&permutation_gate(3).unwrap()) <= 1e-10);
    }

    #[test]
    fn local_gates_preserve_norm(
        b in branch(),
        k in 1usize..=5,
        party_seed in 0usize..5,
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 243),
    ) {
        let dim = 3usize.pow(k as u32);
        let amps: Vec<Complex64> = raw[..dim].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amps = amps.into_iter().map(|a| a / norm).collect();
        let state = QuditState::from_amplitudes(3, k, amps).unwrap();
        let out = state.apply_local(&root_gate(3, Some(b)).unwrap(), party_seed % k + 1).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn measurement_is_reproducible(k in 1usize..=6, j in 0u8..3, seed in any::<u64>()) {
        let state = make_sum_class_state(k, j, 3).unwrap();
        let a = state.measure_all(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = state.measure_all(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn relabeling_leaves_success_unchanged(
        strategies in prop::collection::vec(strategy(), 4),
        perms in prop::collection::vec(perm(), 4),
    ) {
        let profile = StrategyProfile::new(strategies.clone()).unwrap();
        let relabeled = StrategyProfile::new(
            strategies.iter().zip(&perms).map(|(s, p)| s.relabel(*p)).collect(),
        ).unwrap();
        let base = evaluate_collapsed(&profile);
        prop_assert_eq!(evaluate_collapsed(&relabeled), base.clone());
        prop_assert_eq!(evaluate_exhaustive(&relabeled, false).unwrap(), base);
    }

    #[test]
    fn success_lies_between_a_third_and_one(
        strategies in prop::collection::vec(strategy(), 7),
    ) {
        let v = evaluate_collapsed(&StrategyProfile::new(strategies).unwrap());
        prop_assert!(v >= Probability::one_third());
        prop_assert!(v < Probability::from_ratio(1, 1));
    }

    #[test]
    fn transcript_classes_cover_every_admissible_input(
        a in strategy(),
        b in strategy(),
        k_idx in 0usize..3,
        split_seed in 0usize..16,
    ) {
        let k = [4usize, 7, 10][k_idx];
        let split = split_seed % (k + 1);
        let mut strategies = vec![a; split];
        strategies.extend(std::iter::repeat_n(b, k - split));
        let profile = StrategyProfile::new(strategies).unwrap();
        let total: BigUint = transcript_classes(&profile)
            .iter()
            .map(|c| c.counts.iter().sum::<BigUint>() * &c.multiplicity)
            .sum();
        let zero_counts = grouped_sum(GroupedSumSpec::new(k as u64, 0, 3).unwrap());
        prop_assert_eq!(&total, &admissible_count(k));
        prop_assert_eq!(total, zero_counts * BigUint::from(3u32).pow(k as u32));
    }
}

#[test]
fn sum_class_states_are_flat_on_one_third_of_the_basis() {
    for k in 1..=8 {
        for j in 0..3 {
            let state = make_sum_class_state(k, j, 3).unwrap();
            let nonzero: Vec<_> = state
                .amplitudes()
                .iter()
                .filter(|a| a.norm() > 1e-12)
                .collect();
            assert_eq!(nonzero.len(), 3usize.pow(k as u32 - 1));
            assert!(nonzero.iter().all(|a| (*a - nonzero[0]).norm() < 1e-12));
        }
    }
}

#[test]
fn all_tables_are_covered_by_canonical_representatives() {
    let reps = Table::canonical_all();
    assert_eq!(reps.len(), 122);
    for s in Table::all() {
        assert!(reps.contains(&s.canonical()));
    }
}
