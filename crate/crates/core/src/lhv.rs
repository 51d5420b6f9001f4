//! Local-realistic bounds by exhaustive enumeration of deterministic
//! strategies, plus rank-based facet certification.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::DeterministicStrategy;
use crate::error::{Error, Result};
use crate::functional::{BellFunctional, Form};
use crate::scenario::{ConjugationMask, RootTable, Scenario};

/// Default cap on the number of strategies visited.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Strategies per parallel work unit.
const CHUNK: u128 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBoundResult {
    pub bound: f64,
    /// Every strategy within the saturation tolerance, by increasing index.
    pub argmax: Vec<DeterministicStrategy>,
    pub examined: u128,
}

impl ClassicalBoundResult {
    /// The lexicographically smallest maximizing strategy.
    pub fn witness(&self) -> &DeterministicStrategy {
        &self.argmax[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetReport {
    pub dimension: usize,
    pub saturating_count: usize,
    pub rank: usize,
    pub is_facet: bool,
    pub is_valid: bool,
}

/// `1e-9 * max(1, |bound|)`
pub fn saturation_tolerance(bound: f64) -> f64 {
    1e-9 * bound.abs().max(1.0)
}

fn strategy_count(scenario: &Scenario, budget: u64) -> Result<u128> {
    match scenario.num_strategies() {
        Some(n) if n <= budget as u128 => Ok(n),
        Some(n) => Err(Error::BudgetExceeded {
            required: n,
            budget,
        }),
        None => Err(Error::BudgetExceeded {
            required: u128::MAX,
            budget,
        }),
    }
}

/// All `d^(Nk)` strategies in lexicographic order of their assignments.
pub fn enumerate_strategies(
    scenario: Scenario,
    budget: u64,
) -> Result<impl Iterator<Item = DeterministicStrategy>> {
    let n = strategy_count(&scenario, budget)?;
    Ok((0..n).map(move |i| DeterministicStrategy::from_index(scenario, i)))
}

/// Precompiled terms of a functional for fast evaluation on assignments.
#[derive(Debug, Clone)]
pub struct StrategyEvaluator {
    form: Form,
    outcomes: usize,
    roots: RootTable,
    coefficients: Vec<Complex64>,
    /// `parties` pairs `(slot, r)` per term.
    slots: Vec<(usize, usize)>,
    parties: usize,
}

impl StrategyEvaluator {
    pub fn new(functional: &BellFunctional) -> Self {
        let scenario = *functional.scenario();
        let radix = scenario.settings_radix();
        let mut coefficients = Vec::new();
        let mut slots = Vec::new();
        for comp in functional.components() {
            for (xi, c) in comp.coefficients.iter().enumerate() {
                if *c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                coefficients.push(*c);
                let x = radix.digits(xi);
                for (p, (&xp, &r)) in x.iter().zip(comp.mask.exponents()).enumerate() {
                    slots.push((p * scenario.settings + xp, r));
                }
            }
        }
        Self {
            form: functional.form(),
            outcomes: scenario.outcomes,
            roots: scenario.roots(),
            coefficients,
            slots,
            parties: scenario.parties,
        }
    }

    #[inline]
    pub fn sum(&self, assignment: &[usize]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (c, term) in self.coefficients.iter().zip(self.slots.chunks_exact(self.parties)) {
            let e: usize = term.iter().map(|&(slot, r)| r * assignment[slot]).sum();
            total += c * self.roots.pow(e % self.outcomes);
        }
        total
    }

    #[inline]
    pub fn value(&self, assignment: &[usize]) -> f64 {
        self.form.apply(self.sum(assignment))
    }
}

fn advance(assignment: &mut [usize], outcomes: usize) {
    for slot in assignment.iter_mut().rev() {
        *slot += 1;
        if *slot < outcomes {
            return;
        }
        *slot = 0;
    }
}

/// Maps every strategy index in `0..n` through `visit`, in parallel chunks.
fn for_each_chunk<T: Send>(
    scenario: Scenario,
    n: u128,
    visit: impl Fn(u128, u128, &mut Vec<usize>) -> T + Sync,
) -> Vec<T> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut assignment = DeterministicStrategy::from_index(scenario, start)
                .assignment()
                .to_vec();
            visit(start, end, &mut assignment)
        })
        .collect()
}

pub fn classical_bound(functional: &BellFunctional) -> Result<ClassicalBoundResult> {
    classical_bound_with_budget(functional, DEFAULT_BUDGET)
}

/// Maximum of the functional over all deterministic strategies.
pub fn classical_bound_with_budget(
    functional: &BellFunctional,
    budget: u64,
) -> Result<ClassicalBoundResult> {
    let scenario = *functional.scenario();
    let n = strategy_count(&scenario, budget)?;
    let eval = StrategyEvaluator::new(functional);
    let d = scenario.outcomes;
    let partial = for_each_chunk(scenario, n, |start, end, assignment| {
        let mut best = f64::NEG_INFINITY;
        let mut keep: Vec<(u128, f64)> = Vec::new();
        for i in start..end {
            let v = eval.value(assignment);
            if v > best {
                best = v;
                let tol = saturation_tolerance(best);
                keep.retain(|&(_, w)| w >= best - tol);
            }
            if v >= best - saturation_tolerance(best) {
                keep.push((i, v));
            }
            advance(assignment, d);
        }
        (best, keep)
    });
    let bound = partial
        .iter()
        .map(|(b, _)| *b)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = saturation_tolerance(bound);
    let argmax = partial
        .into_iter()
        .flat_map(|(_, keep)| keep)
        .filter(|&(_, v)| v >= bound - tol)
        .map(|(i, _)| DeterministicStrategy::from_index(scenario, i))
        .collect();
    Ok(ClassicalBoundResult {
        bound,
        argmax,
        examined: n,
    })
}

/// Real embedding of a vertex: real parts then imaginary parts of each
/// mask's correlation tensor, masks concatenated in order.
pub fn vertex_embedding(
    scenario: &Scenario,
    masks: &[ConjugationMask],
    strategy: &DeterministicStrategy,
) -> Vec<f64> {
    let roots = scenario.roots();
    let mut out = Vec::with_capacity(2 * masks.len() * scenario.num_settings_tuples());
    for mask in masks {
        let values: Vec<Complex64> = scenario
            .settings_radix()
            .tuples()
            .map(|x| roots.pow(strategy.exponent(&x, mask)))
            .collect();
        out.extend(values.iter().map(|z| z.re));
        out.extend(values.iter().map(|z| z.im));
    }
    out
}

fn exponent_key(scenario: &Scenario, masks: &[ConjugationMask], strategy: &DeterministicStrategy) -> Vec<usize> {
    masks
        .iter()
        .flat_map(|m| {
            scenario
                .settings_radix()
                .tuples()
                .map(move |x| strategy.exponent(&x, m))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Affine rank of a point set (rank of the differences to the first point).
pub fn affine_rank(points: &[Vec<f64>]) -> usize {
    let Some((first, rest)) = points.split_first() else {
        return 0;
    };
    if rest.is_empty() {
        return 0;
    }
    let dim = first.len();
    let m = DMatrix::from_fn(dim, rest.len(), |i, j| rest[j][i] - first[i]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

fn distinct_vertices<'a>(
    scenario: &Scenario,
    masks: &[ConjugationMask],
    strategies: impl Iterator<Item = &'a DeterministicStrategy>,
) -> Vec<Vec<f64>> {
    let mut seen = HashSet::new();
    strategies
        .filter(|s| seen.insert(exponent_key(scenario, masks, s)))
        .map(|s| vertex_embedding(scenario, masks, s))
        .collect()
}

/// Affine dimension of the deterministic correlation polytope for one mask.
pub fn polytope_dimension(scenario: &Scenario, mask: &ConjugationMask) -> Result<usize> {
    polytope_dimension_masks(scenario, std::slice::from_ref(mask), DEFAULT_BUDGET)
}

/// Same, with the tensors of several masks stacked into one vector.
pub fn polytope_dimension_masks(
    scenario: &Scenario,
    masks: &[ConjugationMask],
    budget: u64,
) -> Result<usize> {
    for m in masks {
        m.check(scenario)?;
    }
    let all: Vec<DeterministicStrategy> = enumerate_strategies(*scenario, budget)?.collect();
    Ok(affine_rank(&distinct_vertices(scenario, masks, all.iter())))
}

pub fn facet_check(functional: &BellFunctional) -> Result<FacetReport> {
    facet_check_with_budget(functional, None, DEFAULT_BUDGET)
}

/// Rank certificate for a real-part functional against `claimed` (or the
/// enumerated bound when `None`).
pub fn facet_check_with_budget(
    functional: &BellFunctional,
    claimed: Option<f64>,
    budget: u64,
) -> Result<FacetReport> {
    if functional.form() == Form::Modulus {
        return Err(Error::UnsupportedForm(
            "facet checks need a real-part functional; linearize the modulus form first".into(),
        ));
    }
    let scenario = *functional.scenario();
    let masks: Vec<ConjugationMask> = functional.components().iter().map(|c| c.mask.clone()).collect();
    let exact = classical_bound_with_budget(functional, budget)?;
    let bound = claimed.unwrap_or(exact.bound);
    let tol = saturation_tolerance(bound);
    let is_valid = exact.bound <= bound + tol;
    let eval = StrategyEvaluator::new(functional);
    let saturating_strategies: Vec<DeterministicStrategy> = if claimed.is_none() {
        exact.argmax
    } else {
        enumerate_strategies(scenario, budget)?
            .filter(|s| (eval.value(s.assignment()) - bound).abs() <= tol)
            .collect()
    };
    let dimension = polytope_dimension_masks(&scenario, &masks, budget)?;
    let saturating = distinct_vertices(&scenario, &masks, saturating_strategies.iter());
    let rank = affine_rank(&saturating);
    Ok(FacetReport {
        dimension,
        saturating_count: saturating.len(),
        rank,
        is_facet: is_valid && dimension > 0 && rank + 1 == dimension,
        is_valid,
    })
}

/// `Re[e^(i phi) sum_x c_x E_x]`
pub fn linearize_modulus(functional: &BellFunctional, phase: f64) -> BellFunctional {
    functional
        .scaled(Complex64::from_polar(1.0, phase))
        .with_form(Form::RealPart)
}
