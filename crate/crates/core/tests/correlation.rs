mod common;

use bellwork::correlation::{
    correlation_from_probabilities, strategy_correlation_tensor, DeterministicStrategy, ProbabilityTable,
};
use bellwork::scenario::{ConjugationMask, Scenario};
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

fn small_scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=3, 1usize..=3, 2usize..=5)
        .prop_filter("keep tables small", |&(n, k, d)| (k * d).pow(n as u32) <= 4096)
        .prop_map(|(n, k, d)| scenario(n, k, d))
}

fn mask_for(s: &Scenario, seed: u64) -> ConjugationMask {
    let mut r = rng(seed);
    let exps = (0..s.parties).map(|_| rand::Rng::random_range(&mut r, 0..s.outcomes)).collect();
    ConjugationMask::new(exps, s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_mask_gives_unit_correlations(s in small_scenario(), seed in any::<u64>()) {
        let p = random_table(s, &mut rng(seed));
        let e = correlation_from_probabilities(&p, &ConjugationMask::zeros(s.parties)).unwrap();
        for v in e.values() {
            assert_close(*v, Complex64::new(1.0, 0.0), 1e-12);
        }
    }

    #[test]
    fn conjugated_mask_conjugates_tensor(s in small_scenario(), seed in any::<u64>()) {
        let p = random_table(s, &mut rng(seed));
        let mask = mask_for(&s, seed ^ 0x5a5a);
        let e = correlation_from_probabilities(&p, &mask).unwrap();
        let f = correlation_from_probabilities(&p, &mask.conjugate(s.outcomes)).unwrap();
        for (a, b) in e.values().iter().zip(f.values()) {
            assert_close(a.conj(), *b, 1e-12);
        }
    }

    #[test]
    fn correlations_are_linear_in_mixtures(s in small_scenario(), seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let p1 = random_table(s, &mut r);
        let p2 = random_table(s, &mut r);
        let mask = mask_for(&s, seed.wrapping_add(1));
        let mixed = correlation_from_probabilities(&p1.mix(&p2, lambda).unwrap(), &mask).unwrap();
        let e1 = correlation_from_probabilities(&p1, &mask).unwrap();
        let e2 = correlation_from_probabilities(&p2, &mask).unwrap();
        for ((m, a), b) in mixed.values().iter().zip(e1.values()).zip(e2.values()) {
            assert_close(*m, a * lambda + b * (1.0 - lambda), 1e-12);
        }
    }

    #[test]
    fn vertex_tensor_matches_point_mass(s in small_scenario(), seed in any::<u64>()) {
        let strategy = random_strategy(s, &mut rng(seed));
        let mask = mask_for(&s, seed.rotate_left(7));
        let direct = strategy_correlation_tensor(&strategy, &mask).unwrap();
        let via_table = correlation_from_probabilities(&ProbabilityTable::point_mass(&strategy), &mask).unwrap();
        prop_assert_eq!(direct.values(), via_table.values());
    }

    #[test]
    fn tensors_stay_in_the_unit_disk(s in small_scenario(), seed in any::<u64>()) {
        let p = random_table(s, &mut rng(seed));
        let mask = mask_for(&s, !seed);
        let e = correlation_from_probabilities(&p, &mask).unwrap();
        prop_assert!(e.in_unit_disk(1e-12));
    }

    #[test]
    fn strategy_index_round_trips(s in small_scenario(), seed in any::<u64>()) {
        let strategy = random_strategy(s, &mut rng(seed));
        let again = DeterministicStrategy::from_index(s, strategy.index());
        prop_assert_eq!(again, strategy);
    }
}

#[test]
fn dichotomic_correlations_are_real() {
    let s = scenario(2, 3, 2);
    let mut r = rng(3);
    for _ in 0..50 {
        let e = correlation_from_probabilities(&random_table(s, &mut r), &ConjugationMask::all_ones(2)).unwrap();
        assert!(e.values().iter().all(|v| v.im.abs() < 1e-12));
    }
}

#[test]
fn chsh_strategy_tensor() {
    let s = scenario(2, 2, 2);
    // a = (0, 0), b = (0, 1)
    let strategy = DeterministicStrategy::new(s, vec![0, 0, 0, 1]).unwrap();
    let e = strategy_correlation_tensor(&strategy, &ConjugationMask::all_ones(2)).unwrap();
    let expected = [1.0, -1.0, 1.0, -1.0];
    for (v, want) in e.values().iter().zip(expected) {
        assert_eq!(*v, Complex64::new(want, 0.0));
    }
    let zero = strategy_correlation_tensor(&DeterministicStrategy::zeros(s), &ConjugationMask::all_ones(2)).unwrap();
    assert!(zero.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
}

#[test]
fn malformed_tables_are_rejected() {
    let s = scenario(1, 1, 2);
    assert!(ProbabilityTable::new(s, vec![0.5, 0.6]).is_err());
    assert!(ProbabilityTable::new(s, vec![1.0]).is_err());
    assert!(ProbabilityTable::new(s, vec![1.5, -0.5]).is_err());
    let clamped = ProbabilityTable::new(s, vec![1.0, -1e-16]).unwrap();
    assert_eq!(clamped.values()[1], 0.0);
    assert!(Scenario::new(0, 1, 2).is_err());
    assert!(Scenario::new(1, 1, 1).is_err());
    assert!(ConjugationMask::new(vec![0, 3], &scenario(2, 2, 3)).is_err());
}
