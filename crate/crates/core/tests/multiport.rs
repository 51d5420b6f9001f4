mod common;

use bellwork::cglmp::{cglmp_correlation_functional, i323_functional};
use bellwork::correlation::correlation_from_probabilities;
use bellwork::document::{parse_setup, preset};
use bellwork::lhv::classical_bound;
use bellwork::functional::Form;
use bellwork::multiport::{
    born_probabilities, fourier_multiport, probability_table, quantum_correlation_tensor, QuantumSetup,
    SetupDocument,
};
use bellwork::scenario::{root_of_unity, ConjugationMask, Scenario};
use num_complex::Complex64;
use rand::Rng;

use common::*;

const SCENARIOS: [(usize, usize, usize); 4] = [(2, 2, 3), (2, 3, 3), (3, 2, 3), (2, 2, 5)];

/// Direct sum over modes for `|<a| M^(x)N Phi |s>|^2`, with arbitrary
/// (ungauged) phases `phi[p][x][j]`.
fn born_oracle(s: Scenario, state: &[Complex64], phi: &[Vec<Vec<f64>>], x: &[usize]) -> Vec<f64> {
    let n = s.parties;
    let d = s.outcomes;
    let norm = (d as f64).powf(-(n as f64) / 2.0);
    s.outcome_radix()
        .tuples()
        .map(|a| {
            let amp: Complex64 = s
                .outcome_radix()
                .tuples()
                .zip(state)
                .map(|(j, sj)| {
                    let mut z = *sj * norm;
                    for p in 0..n {
                        z *= root_of_unity(d, (a[p] * j[p]) as i64) * Complex64::from_polar(1.0, phi[p][x[p]][j[p]]);
                    }
                    z
                })
                .sum();
            amp.norm_sqr()
        })
        .collect()
}

#[test]
fn multiports_are_unitary() {
    for d in 2..=14 {
        assert!(fourier_multiport(d).unwrap().unitarity_defect() < 1e-12, "d = {d}");
    }
}

#[test]
fn born_slices_are_normalized() {
    for (i, &(n, k, d)) in SCENARIOS.iter().enumerate() {
        let s = scenario(n, k, d);
        let mut r = rng(100 + i as u64);
        for _ in 0..100 {
            let setup = random_setup(s, &mut r);
            for x in s.settings_radix().tuples() {
                let total: f64 = born_probabilities(&setup, &x).iter().sum();
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn closed_form_matches_born_path() {
    for (i, &(n, k, d)) in SCENARIOS.iter().enumerate() {
        let s = scenario(n, k, d);
        let masks = starred_masks(&s);
        let mut r = rng(200 + i as u64);
        for _ in 0..100 {
            let setup = random_setup(s, &mut r);
            let table = probability_table(&setup).unwrap();
            for mask in &masks {
                let fast = quantum_correlation_tensor(&setup, mask).unwrap();
                let slow = correlation_from_probabilities(&table, mask).unwrap();
                for (a, b) in fast.values().iter().zip(slow.values()) {
                    assert_close(*a, *b, 1e-10);
                }
                let conj = quantum_correlation_tensor(&setup, &mask.conjugate(d)).unwrap();
                for (a, b) in fast.values().iter().zip(conj.values()) {
                    assert_close(a.conj(), *b, 1e-12);
                }
            }
        }
    }
}

#[test]
fn born_rule_matches_mode_sum_oracle() {
    for (i, &(n, k, d)) in SCENARIOS.iter().enumerate() {
        let s = scenario(n, k, d);
        let mut r = rng(300 + i as u64);
        for _ in 0..10 {
            let state: Vec<Complex64> = (0..s.num_outcome_tuples()).map(|_| random_complex(&mut r)).collect();
            let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let state: Vec<Complex64> = state.iter().map(|z| z / norm).collect();
            let mut phi: Vec<Vec<Vec<f64>>> = (0..n)
                .map(|_| (0..k).map(|_| (0..d).map(|_| r.random_range(0.0..6.3)).collect()).collect())
                .collect();
            let setup = QuantumSetup::from_raw(s, state.clone(), phi.iter().flatten().flatten().copied().collect()).unwrap();
            let xs: Vec<Vec<usize>> = s.settings_radix().tuples().collect();
            let before: Vec<Vec<f64>> = xs.iter().map(|x| born_oracle(s, &state, &phi, x)).collect();
            for (x, want) in xs.iter().zip(&before) {
                for (a, b) in born_probabilities(&setup, x).iter().zip(want) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
            // a constant added to one (party, setting) row leaves everything unchanged
            let (p, x) = (r.random_range(0..n), r.random_range(0..k));
            let delta = r.random_range(-10.0..10.0);
            for v in &mut phi[p][x] {
                *v += delta;
            }
            for (xt, want) in xs.iter().zip(&before) {
                for (a, b) in born_oracle(s, &state, &phi, xt).iter().zip(want) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
            let moved = setup.with_phase_offset(p, x, delta);
            assert_eq!(probability_table(&moved).unwrap().values().len(), before.len() * s.num_outcome_tuples());
            for (xt, want) in xs.iter().zip(&before) {
                for (a, b) in born_probabilities(&moved, xt).iter().zip(want) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn product_states_admit_local_models() {
    let mut r = rng(400);
    let fixed = vec![
        preset("chsh").unwrap().build().unwrap(),
        cglmp_correlation_functional(),
        i323_functional(),
        preset("tight-323-g1").unwrap().build().unwrap(),
    ];
    let mut functionals = fixed;
    for &(n, k, d) in &SCENARIOS {
        for form in [Form::RealPart, Form::Modulus] {
            functionals.push(random_functional(scenario(n, k, d), form, &mut r));
        }
    }
    for f in &functionals {
        let s = *f.scenario();
        let bound = classical_bound(f).unwrap().bound;
        for _ in 0..100 {
            let factors: Vec<Vec<Complex64>> = (0..s.parties)
                .map(|_| (0..s.outcomes).map(|_| random_complex(&mut r)).collect())
                .collect();
            let phases = (0..s.parties * s.settings * s.outcomes)
                .map(|i| if i % s.outcomes == 0 { 0.0 } else { r.random_range(0.0..6.3) })
                .collect();
            let setup = QuantumSetup::product(s, &factors, phases).unwrap();
            let q = f.value_on(&setup).unwrap();
            assert!(q <= bound + 1e-9, "{:?}: {q} > {bound}", f.provenance().label);
        }
    }
}

#[test]
fn worked_examples() {
    let s = scenario(2, 2, 3);
    let mut r = rng(500);
    let setup = random_setup(s, &mut r);
    let e = quantum_correlation_tensor(&setup, &ConjugationMask::zeros(2)).unwrap();
    for v in e.values() {
        assert_close(*v, Complex64::new(1.0, 0.0), 1e-12);
    }
    let mut basis_state = vec![Complex64::new(0.0, 0.0); 9];
    basis_state[0] = Complex64::new(1.0, 0.0);
    let phases = (0..12).map(|i| if i % 3 == 0 { 0.0 } else { r.random_range(0.0..6.3) }).collect();
    let point = QuantumSetup::new(s, basis_state, phases).unwrap();
    let e = quantum_correlation_tensor(&point, &ConjugationMask::all_ones(2)).unwrap();
    assert!(e.values().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn setups_validate_their_invariants() {
    let s = scenario(1, 1, 2);
    let half = Complex64::new(0.5f64.sqrt(), 0.0);
    assert!(QuantumSetup::new(s, vec![half, half], vec![0.0, 1.0]).is_ok());
    assert!(QuantumSetup::new(s, vec![half, half], vec![0.3, 1.0]).is_err());
    assert!(QuantumSetup::new(s, vec![half, Complex64::new(0.0, 0.0)], vec![0.0, 1.0]).is_err());
    assert!(QuantumSetup::new(s, vec![half], vec![0.0, 1.0]).is_err());
    let gauged = QuantumSetup::from_raw(s, vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 2.0)], vec![0.3, 1.0]).unwrap();
    assert_eq!(gauged.phase(0, 0, 0), 0.0);
    assert!((gauged.phase(0, 0, 1) - 0.7).abs() < 1e-15);
}

#[test]
fn setup_documents_round_trip() {
    let s = scenario(2, 2, 3);
    let setup = random_setup(s, &mut rng(600));
    let doc = SetupDocument::from(setup.clone());
    let text = serde_json::to_string(&doc).unwrap();
    let back = parse_setup(&text).unwrap();
    for (a, b) in back.state().iter().zip(setup.state()) {
        assert_close(*a, *b, 1e-14);
    }
    for (a, b) in back.phases().iter().zip(setup.phases()) {
        assert!((a - b).abs() < 1e-14);
    }
    let broken = text.replacen("\"phases\":[[", "\"phases\":[[[0.0],", 1);
    assert!(parse_setup(&broken).is_err());
}
