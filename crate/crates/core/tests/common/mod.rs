#![allow(dead_code)]

use bellwork::correlation::{CorrelationTensor, DeterministicStrategy, ProbabilityTable};
use bellwork::functional::{BellFunctional, Form, FunctionalComponent};
use bellwork::multiport::QuantumSetup;
use bellwork::scenario::{ConjugationMask, Scenario};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scenario(n: usize, k: usize, d: usize) -> Scenario {
    Scenario::new(n, k, d).unwrap()
}

pub fn random_table(s: Scenario, rng: &mut impl Rng) -> ProbabilityTable {
    let cols = s.num_outcome_tuples();
    let mut p = Vec::with_capacity(cols * s.num_settings_tuples());
    for _ in 0..s.num_settings_tuples() {
        let row: Vec<f64> = (0..cols).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let total: f64 = row.iter().sum();
        p.extend(row.into_iter().map(|v| v / total));
    }
    ProbabilityTable::new(s, p).unwrap()
}

pub fn random_strategy(s: Scenario, rng: &mut impl Rng) -> DeterministicStrategy {
    let a = (0..s.parties * s.settings)
        .map(|_| rng.random_range(0..s.outcomes))
        .collect();
    DeterministicStrategy::new(s, a).unwrap()
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_setup(s: Scenario, rng: &mut impl Rng) -> QuantumSetup {
    let state = (0..s.num_outcome_tuples()).map(|_| random_complex(rng)).collect();
    let phases = (0..s.parties * s.settings * s.outcomes)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    QuantumSetup::from_raw(s, state, phases).unwrap()
}

/// Tensor with entries in the unit disk.
pub fn random_tensor(s: Scenario, mask: ConjugationMask, rng: &mut impl Rng) -> CorrelationTensor {
    let values = (0..s.num_settings_tuples())
        .map(|_| Complex64::from_polar(rng.random::<f64>(), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    CorrelationTensor::new(s, mask, values).unwrap()
}

/// Every mask with entries in `{1, d - 1}`.
pub fn starred_masks(s: &Scenario) -> Vec<ConjugationMask> {
    let n = s.parties;
    let d = s.outcomes;
    let mut out: Vec<ConjugationMask> = (0..1usize << n)
        .map(|bits| {
            let r = (0..n).map(|p| if bits >> p & 1 == 1 { d - 1 } else { 1 }).collect();
            ConjugationMask::new(r, s).unwrap()
        })
        .collect();
    out.dedup();
    out
}

pub fn random_functional(s: Scenario, form: Form, rng: &mut impl Rng) -> BellFunctional {
    let mask = ConjugationMask::all_ones(s.parties);
    let coefficients = (0..s.num_settings_tuples()).map(|_| random_complex(rng)).collect();
    BellFunctional::from_components(s, vec![FunctionalComponent { mask, coefficients }], form).unwrap()
}

pub fn assert_close(a: Complex64, b: Complex64, tol: f64) {
    assert!((a - b).norm() <= tol, "{a} vs {b} (tol {tol})");
}
