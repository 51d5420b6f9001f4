mod common;

use bellwork::cglmp::cglmp_correlation_functional;
use bellwork::document::preset;
use bellwork::functional::{BellFunctional, Form};
use bellwork::multiport::probability_table;
use bellwork::optimize::lbfgs::{minimize, LbfgsConfig};
use bellwork::optimize::objective::Objective;
use bellwork::optimize::{
    maximize_restricted_ghz, maximize_violation, maximize_with_bound, ratio, OptimizationConfig,
};
use bellwork::scenario::ConjugationMask;
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

fn quick(restarts: usize) -> OptimizationConfig {
    OptimizationConfig {
        max_iter: 300,
        ..OptimizationConfig::default()
    }
    .with_restarts(restarts)
}

#[test]
fn rosenbrock_minimum() {
    let out = minimize(
        |x, g| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        },
        vec![-1.2, 1.0],
        &LbfgsConfig {
            tolerance: 1e-14,
            ..LbfgsConfig::default()
        },
    );
    assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5, "{:?}", out.x);
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = rng(1);
    for f in [
        cglmp_correlation_functional(),
        random_functional(scenario(2, 2, 3), Form::Modulus, &mut r),
        bellwork::cglmp::i323_functional(),
    ] {
        let obj = Objective::new(&f, None);
        let x: Vec<f64> = (0..obj.dimension()).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect();
        let mut g = vec![0.0; x.len()];
        obj.value_and_gradient(&x, &mut g);
        let h = 1e-6;
        for i in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (obj.value(&up) - obj.value(&down)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5 * (1.0 + fd.abs()), "component {i}: {fd} vs {}", g[i]);
        }
    }
}

#[test]
fn chsh_reaches_tsirelson() {
    let chsh = preset("chsh").unwrap().build().unwrap();
    let r = maximize_violation(&chsh, &quick(8)).unwrap();
    assert!((r.ratio.unwrap() - std::f64::consts::SQRT_2).abs() < 1e-6);
}

#[test]
fn never_below_classical_when_a_vertex_is_reachable() {
    for f in [preset("chsh").unwrap().build().unwrap(), cglmp_correlation_functional()] {
        let r = maximize_violation(&f, &quick(6)).unwrap();
        assert!(r.value >= r.classical_bound - 1e-6);
    }
}

#[test]
fn reported_values_survive_born_reevaluation() {
    let mut rr = rng(2);
    let functionals: Vec<BellFunctional> = vec![
        cglmp_correlation_functional(),
        random_functional(scenario(2, 3, 3), Form::RealPart, &mut rr),
        random_functional(scenario(3, 2, 3), Form::Modulus, &mut rr),
        bellwork::cglmp::i323_functional(),
    ];
    for f in &functionals {
        let r = maximize_violation(f, &quick(3)).unwrap();
        let table = probability_table(&r.setup).unwrap();
        let again = f.value_on(&table).unwrap();
        assert!((again - r.value).abs() < 1e-9, "{again} vs {}", r.value);
        assert_eq!(r.restart_values.len(), 3);
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 3);
        assert_eq!(r.restart_values[r.best_restart], r.restart_values.iter().cloned().fold(f64::MIN, f64::max));
    }
}

#[test]
fn more_restarts_never_hurt() {
    let f = cglmp_correlation_functional();
    let mut last = f64::NEG_INFINITY;
    for restarts in [1, 2, 4, 8] {
        let r = maximize_violation(&f, &quick(restarts).with_seed(9)).unwrap();
        assert!(r.value >= last);
        last = r.value;
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let f = random_functional(scenario(2, 2, 3), Form::Modulus, &mut rng(3));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| maximize_violation(&f, &quick(5).with_seed(77)).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn vanishing_bound_has_no_ratio() {
    assert_eq!(ratio(1.0, 0.0), None);
    assert_eq!(ratio(1.0, 1e-10), None);
    assert_eq!(ratio(3.0, 2.0), Some(1.5));
    let f = cglmp_correlation_functional();
    let r = maximize_with_bound(&f, 0.0, None, &quick(1)).unwrap();
    assert!(r.ratio.is_none());
}

#[test]
fn configuration_is_validated() {
    let f = cglmp_correlation_functional();
    assert!(maximize_violation(&f, &quick(0)).is_err());
    let bad = OptimizationConfig {
        tolerance: 0.0,
        ..quick(1)
    };
    assert!(maximize_violation(&f, &bad).is_err());
    assert!(maximize_restricted_ghz(&f, &quick(1)).is_err());
}

#[test]
fn restricted_search_keeps_the_support() {
    let f = bellwork::cglmp::i323_functional();
    let r = maximize_restricted_ghz(&f, &quick(4)).unwrap();
    for (j, a) in r.setup.state().iter().enumerate() {
        if ![0, 13, 26].contains(&j) {
            assert_eq!(*a, Complex64::new(0.0, 0.0));
        }
    }
    assert!(r.value <= 3.0 + 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn optimum_is_a_valid_setup(seed in any::<u64>(), conj in any::<bool>()) {
        let s = scenario(2, 2, 3);
        let f = random_functional(s, if conj { Form::Modulus } else { Form::RealPart }, &mut rng(seed));
        let r = maximize_violation(&f, &quick(2).with_seed(seed)).unwrap();
        let norm: f64 = r.setup.state().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!((0..2).all(|p| (0..2).all(|x| r.setup.phase(p, x, 0) == 0.0)));
        let e = bellwork::multiport::quantum_correlation_tensor(&r.setup, &ConjugationMask::all_ones(2)).unwrap();
        prop_assert!(e.in_unit_disk(1e-12));
        prop_assert!((f.value_on(&r.setup).unwrap() - r.value).abs() < 1e-12);
    }
}
