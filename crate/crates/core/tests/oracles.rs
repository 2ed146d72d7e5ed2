//! Independent closed-form and brute-force cross-checks.

use num_bigint::BigUint;
use qtrit_core::bounds::{self, Family, ImRule};
use qtrit_core::classical_analysis::{
    best_homogeneous, canonical_division, evaluate_collapsed, DivisionName, StrategyProfile,
};
use qtrit_core::quantum_protocol::{
    enumerate_admissible, sample_admissible, verify_lemma, AnalyticEngine, DenseEngine,
};
use qtrit_core::{binomial, grouped_sum, GroupedSumSpec, Probability, RootBranch};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gs(n: u64, q: u64, p: u64) -> BigUint {
    grouped_sum(GroupedSumSpec::new(n, q, p).unwrap())
}

/// Division A forwards `Y` verbatim, so the referee only has to guess `l(X)`
/// and its best guess is the most frequent zero-count residue mod 9.
fn homogeneous_a_oracle(k: u64) -> Probability {
    let best = (0..3).map(|r| gs(k, 3 * r, 9)).max().unwrap();
    Probability::from_counts(best, gs(k, 0, 3))
}

#[test]
fn homogeneous_a_matches_closed_form() {
    let a = canonical_division(DivisionName::A, None).unwrap();
    for k in (4..=100).step_by(3) {
        let profile = StrategyProfile::homogeneous(a, k).unwrap();
        assert_eq!(
            evaluate_collapsed(&profile),
            homogeneous_a_oracle(k as u64),
            "k = {k}"
        );
    }
    let v = homogeneous_a_oracle(100);
    assert!(v.gap_to_third_f64().abs() < 0.05);
}

#[test]
fn best_homogeneous_at_thirteen_is_division_a() {
    let (s, v) = best_homogeneous(13).unwrap();
    assert_eq!(s.to_string(), "001122");
    assert_eq!(v, homogeneous_a_oracle(13));
    assert_eq!(v, Probability::from_ratio(1716, 2731));
}

#[test]
fn admissible_enumeration_matches_counting() {
    for k in [4usize, 7, 10] {
        let n = enumerate_admissible(k).unwrap().count() as u64;
        let expected = gs(k as u64, 0, 3) * BigUint::from(3u32).pow(k as u32);
        assert_eq!(BigUint::from(n), expected);
    }
}

#[test]
fn analytic_engine_is_perfect_at_a_thousand_parties() {
    let engine = AnalyticEngine::new(verify_lemma(&[4, 7], 1e-10).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..200 {
        let input = sample_admissible(1000, &mut rng).unwrap();
        let run = engine.run(&input, &mut rng);
        assert!(run.success());
        assert_eq!(run.transmissions.len(), 1000);
    }
}

/// Outcome strings at k = 4 are uniform over the class; both engines must
/// produce the same distribution. Chi-square over the 27 strings of class `l`.
#[test]
fn dense_and_analytic_outcome_distributions_agree() {
    // 99% quantile of chi-square with 26 degrees of freedom.
    const CHI2_26_99: f64 = 45.6417;
    let engine = AnalyticEngine::new(verify_lemma(&[4], 1e-10).unwrap()).unwrap();
    let mut dense = DenseEngine::new(RootBranch::new(0, 0).unwrap()).unwrap();
    let input = qtrit_core::RegisterInput::new(vec![0, 1, 2, 0], vec![1, 0, 0, 0]).unwrap();
    let trials = 27_000;
    let index = |o: &[u8]| o.iter().fold(0usize, |acc, &d| acc * 3 + d as usize);
    for which in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + which);
        let mut counts = vec![0u32; 81];
        for _ in 0..trials {
            let run = if which == 0 {
                dense.run(&input, &mut rng).unwrap()
            } else {
                engine.run(&input, &mut rng)
            };
            assert!(run.success());
            counts[index(&run.outcomes)] += 1;
        }
        let expected = trials as f64 / 27.0;
        let chi2: f64 = counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert_eq!(counts.iter().filter(|&&c| c > 0).count(), 27);
        assert!(chi2 < CHI2_26_99, "engine {which}: chi2 = {chi2}");
    }
}

#[test]
fn n_family_is_exactly_a_third_for_nonzero_residues() {
    for j in 1..=40 {
        for p in bounds::default_grid(Family::N, j, ImRule::Max) {
            if p.a > 0 {
                assert_eq!(
                    bounds::bound(Family::N, &p).unwrap(),
                    Probability::one_third()
                );
            }
        }
    }
}

/// Per grid point the A gap oscillates in sign and size; the worst point over
/// the grid shrinks monotonically, inside a geometric envelope.
#[test]
fn a_family_worst_gap_decreases() {
    let js: Vec<u64> = (5..=60).step_by(5).collect();
    let rows = bounds::convergence_table(Family::A, &js, |j| {
        bounds::default_grid(Family::A, j, ImRule::Max)
    })
    .unwrap();
    let mut prev = f64::INFINITY;
    for &j in &js {
        let worst = rows
            .iter()
            .filter(|r| r.j == j)
            .map(|r| r.value.gap_to_third_f64().abs())
            .fold(0.0, f64::max);
        let envelope = 3.0 * (std::f64::consts::PI / 9.0).cos().powi(3 * j as i32 + 1);
        assert!(worst < prev, "j = {j}: {worst} !< {prev}");
        assert!(worst <= envelope, "j = {j}: {worst} > {envelope}");
        prev = worst;
    }
}

#[test]
fn bound_values_are_probabilities() {
    for family in [Family::A, Family::F, Family::L, Family::N] {
        for rule in [
            ImRule::Max,
            ImRule::Fixed(0),
            ImRule::Fixed(1),
            ImRule::Fixed(2),
        ] {
            for j in [1, 2, 7, 30] {
                for p in bounds::default_grid(family, j, rule) {
                    let v = bounds::bound(family, &p).unwrap();
                    assert!(
                        v >= Probability::from_ratio(0, 1) && v <= Probability::from_ratio(1, 1),
                        "{family} {p:?}: {v}"
                    );
                }
            }
        }
    }
}

#[test]
fn max_rule_dominates_fixed_rules() {
    for family in [Family::F, Family::L] {
        for j in [1, 3, 10] {
            for max in &bounds::default_grid(family, j, ImRule::Max) {
                let top = bounds::bound(family, max).unwrap();
                for r in 0..3 {
                    let p = bounds::BoundParams {
                        im_rule: ImRule::Fixed(r),
                        ..*max
                    };
                    assert!(bounds::bound(family, &p).unwrap() <= top);
                }
            }
        }
    }
}

#[test]
fn inner_ratio_converges_at_forty() {
    let n = 40u64;
    let two_n = binomial(n, 0) << n as usize;
    for q in 0..3 {
        let r = Probability::from_counts(gs(n, q, 3), two_n.clone());
        assert!(r.gap_to_third_f64().abs() <= 1e-9);
    }
}
