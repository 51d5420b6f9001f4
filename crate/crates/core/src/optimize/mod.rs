//! Multi-start maximization of quantum values over multiport setups.
//!
//! Each restart starts from a point of a shifted low-discrepancy sequence,
//! runs L-BFGS on the joint state/phase parameterization, replaces the state
//! by the top eigenvector of the functional's Hermitian form for the found
//! phases, and runs L-BFGS again. Restarts are independent, so the result
//! does not depend on the number of worker threads.

pub mod lbfgs;
pub mod objective;
pub mod scan;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::BellFunctional;
use crate::lhv::classical_bound;
use crate::multiport::QuantumSetup;

pub use lbfgs::{minimize, LbfgsConfig, LbfgsOutcome};
pub use objective::Objective;
pub use scan::*;

/// Threshold below which a classical bound is treated as zero.
pub const RATIO_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tolerance: f64,
    pub seed: u64,
    /// Run the eigenvector state update between local searches.
    pub polish: bool,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            max_iter: 2000,
            tolerance: 1e-8,
            seed: 0,
            polish: true,
        }
    }
}

impl OptimizationConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidSetup("at least one restart is required".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidSetup("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub classical_bound: f64,
    /// `value / classical_bound`, absent when the bound vanishes.
    pub ratio: Option<f64>,
    pub setup: QuantumSetup,
    pub best_restart: usize,
    pub iterations: usize,
    pub restart_values: Vec<f64>,
    pub histogram: Vec<HistogramBin>,
}

pub fn ratio(value: f64, bound: f64) -> Option<f64> {
    (bound.abs() > RATIO_THRESHOLD).then(|| value / bound)
}

/// Maximizes over all states and phases; the classical bound is enumerated.
pub fn maximize_violation(functional: &BellFunctional, config: &OptimizationConfig) -> Result<OptResult> {
    let bound = classical_bound(functional)?.bound;
    maximize_with_bound(functional, bound, None, config)
}

/// Same search restricted to `a|000> + b|111> + c|222>`.
pub fn maximize_restricted_ghz(functional: &BellFunctional, config: &OptimizationConfig) -> Result<OptResult> {
    let s = functional.scenario();
    if s.parties != 3 || s.outcomes != 3 {
        return Err(Error::WrongScenario(format!(
            "the GHZ-family search needs three parties with three outcomes, got {s}"
        )));
    }
    let bound = classical_bound(functional)?.bound;
    maximize_with_bound(functional, bound, Some(ghz_support(s.parties, s.outcomes)), config)
}

/// Mode indices of `|j j .. j>`.
pub fn ghz_support(parties: usize, outcomes: usize) -> Vec<usize> {
    let step: usize = (0..parties).map(|p| outcomes.pow(p as u32)).sum();
    (0..outcomes).map(|j| j * step).collect()
}

struct RestartOutcome {
    value: f64,
    params: Vec<f64>,
    iterations: usize,
}

/// Core search with a known bound and optional amplitude support.
pub fn maximize_with_bound(
    functional: &BellFunctional,
    bound: f64,
    support: Option<Vec<usize>>,
    config: &OptimizationConfig,
) -> Result<OptResult> {
    config.validate()?;
    let objective = Objective::new(functional, support);
    let sequence = StartSequence::new(objective.dimension(), objective.amplitude_dimension(), config.seed);
    let lbfgs = LbfgsConfig {
        max_iter: config.max_iter,
        tolerance: config.tolerance,
        ..LbfgsConfig::default()
    };
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|n| run_restart(&objective, sequence.point(n + 1), &lbfgs, config.polish))
        .collect();
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &RestartOutcome)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.value >= r.value => acc,
            _ => Some((i, r)),
        })
        .expect("at least one restart");
    let setup = objective.to_setup(&best.params)?;
    let value = functional.value_on(&setup)?;
    let restart_values: Vec<f64> = outcomes.iter().map(|r| r.value).collect();
    Ok(OptResult {
        value,
        classical_bound: bound,
        ratio: ratio(value, bound),
        setup,
        best_restart,
        iterations: best.iterations,
        histogram: histogram(&restart_values, 10),
        restart_values,
    })
}

fn run_restart(objective: &Objective, x0: Vec<f64>, config: &LbfgsConfig, polish: bool) -> RestartOutcome {
    let neg = |x: &[f64], g: &mut [f64]| {
        let v = objective.value_and_gradient(x, g);
        g.iter_mut().for_each(|gi| *gi = -*gi);
        -v
    };
    let mut out = minimize(neg, x0, config);
    let mut iterations = out.iterations;
    if polish {
        for _ in 0..2 {
            let mut x = out.x.clone();
            objective.polish_state(&mut x);
            let next = minimize(neg, x, config);
            iterations += next.iterations;
            let improved = next.value < out.value - config.tolerance * out.value.abs().max(1.0);
            if next.value <= out.value {
                out = next;
            }
            if !improved {
                break;
            }
        }
    }
    RestartOutcome {
        value: -out.value,
        params: out.x,
        iterations,
    }
}

/// Shifted additive recurrence `frac(shift + n alpha)` with the generalized
/// golden-ratio increments; amplitudes come out Gaussian via Box-Muller.
struct StartSequence {
    alpha: Vec<f64>,
    shift: Vec<f64>,
    amplitudes: usize,
}

impl StartSequence {
    fn new(dimension: usize, amplitudes: usize, seed: u64) -> Self {
        let mut phi = 2.0_f64;
        for _ in 0..64 {
            let f = phi.powi(dimension as i32 + 1) - phi - 1.0;
            let df = (dimension as f64 + 1.0) * phi.powi(dimension as i32) - 1.0;
            phi -= f / df;
        }
        let alpha = (1..=dimension).map(|i| (1.0 / phi.powi(i as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dimension).map(|_| rng.random::<f64>()).collect();
        Self {
            alpha,
            shift,
            amplitudes,
        }
    }

    fn point(&self, n: usize) -> Vec<f64> {
        let u: Vec<f64> = self
            .alpha
            .iter()
            .zip(&self.shift)
            .map(|(a, s)| (s + n as f64 * a).fract())
            .collect();
        let half = self.amplitudes / 2;
        let mut x = vec![0.0; u.len()];
        for i in 0..half {
            let u1 = u[2 * i].max(1e-12);
            let u2 = u[2 * i + 1];
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            x[i] = r * theta.cos();
            x[half + i] = r * theta.sin();
        }
        for i in self.amplitudes..u.len() {
            x[i] = std::f64::consts::TAU * u[i];
        }
        x
    }
}

fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return Vec::new();
    }
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return vec![HistogramBin {
            lower: lo,
            upper: hi,
            count: values.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lower: lo + b as f64 * width,
            upper: if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}
