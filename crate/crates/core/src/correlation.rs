//! Probability tables, generalized correlation tensors and deterministic
//! strategies.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ConjugationMask, Scenario};

const NORMALIZATION_TOL: f64 = 1e-12;
const NEGATIVE_CLAMP: f64 = 1e-15;

/// Conditional distribution `p(a|x)` for every settings tuple `x`.
///
/// Stored row-major: entry `x * d^N + a` with both tuples flattened in
/// canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    scenario: Scenario,
    p: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(scenario: Scenario, mut p: Vec<f64>) -> Result<Self> {
        let rows = scenario.num_settings_tuples();
        let cols = scenario.num_outcome_tuples();
        if p.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "table for {scenario} needs {} entries, got {}",
                rows * cols,
                p.len()
            )));
        }
        for (i, v) in p.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::NotNormalized(format!("entry {i} is not finite")));
            }
            if *v < 0.0 {
                if *v < -NEGATIVE_CLAMP {
                    return Err(Error::NotNormalized(format!("entry {i} is negative ({v})")));
                }
                *v = 0.0;
            }
        }
        for (x, row) in p.chunks(cols).enumerate() {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized(format!(
                    "settings tuple {x} sums to {total}"
                )));
            }
        }
        Ok(Self { scenario, p })
    }

    /// Builds a table from `f(x, a)` over canonical tuples.
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> f64) -> Result<Self> {
        let settings = scenario.settings_radix();
        let outcomes = scenario.outcome_radix();
        let mut p = Vec::with_capacity(settings.size() * outcomes.size());
        for x in settings.tuples() {
            for a in outcomes.tuples() {
                p.push(f(&x, &a));
            }
        }
        Self::new(scenario, p)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let n = scenario.num_outcome_tuples();
        let p = vec![1.0 / n as f64; n * scenario.num_settings_tuples()];
        Self { scenario, p }
    }

    /// Point-mass table of a deterministic strategy.
    pub fn point_mass(strategy: &DeterministicStrategy) -> Self {
        let scenario = strategy.scenario;
        let outcomes = scenario.outcome_radix();
        let cols = outcomes.size();
        let mut p = vec![0.0; scenario.num_settings_tuples() * cols];
        for (xi, x) in scenario.settings_radix().tuples().enumerate() {
            let a: Vec<usize> = x
                .iter()
                .enumerate()
                .map(|(party, &setting)| strategy.outcome(party, setting))
                .collect();
            p[xi * cols + outcomes.index(&a)] = 1.0;
        }
        Self { scenario, p }
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.scenario != other.scenario {
            return Err(Error::DimensionMismatch("mixing tables of different scenarios".into()));
        }
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Self::new(self.scenario, p)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    /// Row `p(.|x)` for the flattened settings index `x`.
    pub fn row(&self, settings_index: usize) -> &[f64] {
        let cols = self.scenario.num_outcome_tuples();
        &self.p[settings_index * cols..(settings_index + 1) * cols]
    }

    pub fn get(&self, settings: &[usize], outcomes: &[usize]) -> f64 {
        let xi = self.scenario.settings_radix().index(settings);
        let ai = self.scenario.outcome_radix().index(outcomes);
        self.row(xi)[ai]
    }
}

/// Generalized correlation tensor `E_x(r) = sum_a alpha^(r . a) p(a|x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTensor {
    scenario: Scenario,
    mask: ConjugationMask,
    values: Vec<Complex64>,
}

impl CorrelationTensor {
    /// Wraps raw values. Only the shape is checked, so arbitrary complex
    /// tensors (outside the correlation polytope) are allowed here.
    pub fn new(scenario: Scenario, mask: ConjugationMask, values: Vec<Complex64>) -> Result<Self> {
        mask.check(&scenario)?;
        if values.len() != scenario.num_settings_tuples() {
            return Err(Error::DimensionMismatch(format!(
                "correlation tensor for {scenario} needs {} entries, got {}",
                scenario.num_settings_tuples(),
                values.len()
            )));
        }
        Ok(Self {
            scenario,
            mask,
            values,
        })
    }

    pub fn zeros(scenario: Scenario, mask: ConjugationMask) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); scenario.num_settings_tuples()];
        Self {
            scenario,
            mask,
            values,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn mask(&self) -> &ConjugationMask {
        &self.mask
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, settings: &[usize]) -> Complex64 {
        self.values[self.scenario.settings_radix().index(settings)]
    }

    /// Entrywise conjugate, labelled with the conjugated mask.
    pub fn conj(&self) -> Self {
        Self {
            scenario: self.scenario,
            mask: self.mask.conjugate(self.scenario.outcomes),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// True when every entry lies in the closed unit disk (up to `tol`).
    pub fn in_unit_disk(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.norm() <= 1.0 + tol)
    }

    /// Real embedding `(Re E_0, .., Re E_n, Im E_0, .., Im E_n)`.
    pub fn real_embedding(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.values.iter().map(|v| v.re).collect();
        out.extend(self.values.iter().map(|v| v.im));
        out
    }
}

/// Fourier component of a probability table for the given mask.
pub fn correlation_from_probabilities(
    p: &ProbabilityTable,
    mask: &ConjugationMask,
) -> Result<CorrelationTensor> {
    let scenario = *p.scenario();
    mask.check(&scenario)?;
    let d = scenario.outcomes;
    let roots = scenario.roots();
    let digits = scenario.outcome_radix().digit_table();
    let n = scenario.parties;
    // Phase exponent for every outcome tuple, shared by all rows.
    let exponents: Vec<usize> = digits
        .chunks(n)
        .map(|a| {
            a.iter()
                .zip(mask.exponents())
                .map(|(&ap, &rp)| ap * rp)
                .sum::<usize>()
                % d
        })
        .collect();
    let values = (0..scenario.num_settings_tuples())
        .map(|x| {
            p.row(x)
                .iter()
                .zip(&exponents)
                .map(|(&prob, &e)| roots.pow(e) * prob)
                .sum()
        })
        .collect();
    CorrelationTensor::new(scenario, mask.clone(), values)
}

/// One outcome in `Z_d` for every (party, setting) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    scenario: Scenario,
    /// Entry `p * k + x` is the outcome of party `p` under setting `x`.
    assignment: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(scenario: Scenario, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != scenario.parties * scenario.settings {
            return Err(Error::DimensionMismatch(format!(
                "strategy for {scenario} needs {} assignments, got {}",
                scenario.parties * scenario.settings,
                assignment.len()
            )));
        }
        if let Some(bad) = assignment.iter().find(|&&a| a >= scenario.outcomes) {
            return Err(Error::DimensionMismatch(format!(
                "outcome {bad} is outside 0..{}",
                scenario.outcomes
            )));
        }
        Ok(Self {
            scenario,
            assignment,
        })
    }

    pub fn zeros(scenario: Scenario) -> Self {
        Self {
            scenario,
            assignment: vec![0; scenario.parties * scenario.settings],
        }
    }

    /// The `index`-th strategy in lexicographic order of the flat assignment.
    pub fn from_index(scenario: Scenario, mut index: u128) -> Self {
        let len = scenario.parties * scenario.settings;
        let d = scenario.outcomes as u128;
        let mut assignment = vec![0; len];
        for slot in assignment.iter_mut().rev() {
            *slot = (index % d) as usize;
            index /= d;
        }
        Self {
            scenario,
            assignment,
        }
    }

    pub fn index(&self) -> u128 {
        let d = self.scenario.outcomes as u128;
        self.assignment.iter().fold(0, |acc, &a| acc * d + a as u128)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn outcome(&self, party: usize, setting: usize) -> usize {
        self.assignment[party * self.scenario.settings + setting]
    }

    /// Exponent `sum_p r_p a_p(x_p) mod d` of the strategy's correlation.
    pub fn exponent(&self, settings: &[usize], mask: &ConjugationMask) -> usize {
        settings
            .iter()
            .zip(mask.exponents())
            .enumerate()
            .map(|(party, (&x, &r))| r * self.outcome(party, x))
            .sum::<usize>()
            % self.scenario.outcomes
    }
}

/// `alpha^(sum_p r_p a_p(x_p))` for a deterministic strategy.
pub fn strategy_value(
    strategy: &DeterministicStrategy,
    settings: &[usize],
    mask: &ConjugationMask,
) -> Complex64 {
    crate::scenario::root_of_unity(
        strategy.scenario.outcomes,
        strategy.exponent(settings, mask) as i64,
    )
}

pub fn strategy_correlation_tensor(
    strategy: &DeterministicStrategy,
    mask: &ConjugationMask,
) -> Result<CorrelationTensor> {
    let scenario = strategy.scenario;
    mask.check(&scenario)?;
    let roots = scenario.roots();
    let values = scenario
        .settings_radix()
        .tuples()
        .map(|x| roots.pow(strategy.exponent(&x, mask)))
        .collect();
    CorrelationTensor::new(scenario, mask.clone(), values)
}

/// Anything that can produce correlation tensors for arbitrary masks.
pub trait CorrelationSource {
    fn scenario(&self) -> &Scenario;
    fn correlations(&self, mask: &ConjugationMask) -> Result<CorrelationTensor>;
}

impl CorrelationSource for ProbabilityTable {
    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn correlations(&self, mask: &ConjugationMask) -> Result<CorrelationTensor> {
        correlation_from_probabilities(self, mask)
    }
}

impl CorrelationSource for DeterministicStrategy {
    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn correlations(&self, mask: &ConjugationMask) -> Result<CorrelationTensor> {
        strategy_correlation_tensor(self, mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::root_of_unity;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn uniform_table_has_vanishing_correlations() {
        let s = Scenario::new(2, 2, 3).unwrap();
        let p = ProbabilityTable::uniform(s);
        for mask in [vec![1, 1], vec![1, 2], vec![0, 1]] {
            let e = correlation_from_probabilities(&p, &ConjugationMask::new(mask, &s).unwrap())
                .unwrap();
            assert!(e.values().iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn dichotomic_sign_rule() {
        let s = Scenario::new(2, 1, 2).unwrap();
        let p = ProbabilityTable::from_fn(s, |_, a| if a == [0, 1] { 1.0 } else { 0.0 }).unwrap();
        let e = correlation_from_probabilities(&p, &ConjugationMask::all_ones(2)).unwrap();
        assert!((e.get(&[0, 0]) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn three_outcome_point_mass() {
        let s = Scenario::new(2, 1, 3).unwrap();
        let p = ProbabilityTable::from_fn(s, |_, a| if a == [1, 1] { 1.0 } else { 0.0 }).unwrap();
        let mask = ConjugationMask::new(vec![1, 2], &s).unwrap();
        let e = correlation_from_probabilities(&p, &mask).unwrap();
        assert!((e.get(&[0, 0]) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mask_length_is_checked() {
        let s = Scenario::new(2, 2, 3).unwrap();
        let p = ProbabilityTable::uniform(s);
        let err = correlation_from_probabilities(&p, &ConjugationMask::all_ones(3)).unwrap_err();
        assert_eq!(
            err,
            Error::MaskLength {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn strategy_values() {
        let s = Scenario::new(2, 1, 2).unwrap();
        let st = DeterministicStrategy::new(s, vec![0, 1]).unwrap();
        assert_eq!(strategy_value(&st, &[0, 0], &ConjugationMask::all_ones(2)), c(-1.0, 0.0));

        let s3 = Scenario::new(3, 2, 3).unwrap();
        let zero = DeterministicStrategy::zeros(s3);
        let mask = ConjugationMask::new(vec![1, 2, 1], &s3).unwrap();
        assert_eq!(strategy_value(&zero, &[1, 0, 1], &mask), c(1.0, 0.0));

        // exponents (1,2,2) under mask (1,2,1): 1 + 4 + 2 = 7 = 1 mod 3
        let st = DeterministicStrategy::new(s3, vec![1, 0, 2, 0, 2, 0]).unwrap();
        let v = strategy_value(&st, &[0, 0, 0], &mask);
        assert!((v - root_of_unity(3, 1)).norm() < 1e-15);
    }

    #[test]
    fn strategy_tensor_expansion() {
        let s = Scenario::new(2, 2, 2).unwrap();
        // a = (0, 0), b = (0, 1)
        let st = DeterministicStrategy::new(s, vec![0, 0, 0, 1]).unwrap();
        let e = strategy_correlation_tensor(&st, &ConjugationMask::all_ones(2)).unwrap();
        let expect = [1.0, -1.0, 1.0, -1.0];
        for (v, want) in e.values().iter().zip(expect) {
            assert!((v - c(want, 0.0)).norm() < 1e-15);
        }
        let zero = strategy_correlation_tensor(&DeterministicStrategy::zeros(s), &ConjugationMask::all_ones(2))
            .unwrap();
        assert!(zero.values().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn conjugated_mask_conjugates_tensor() {
        let s = Scenario::new(2, 2, 5).unwrap();
        let st = DeterministicStrategy::new(s, vec![1, 4, 2, 3]).unwrap();
        let mask = ConjugationMask::new(vec![1, 3], &s).unwrap();
        let e = strategy_correlation_tensor(&st, &mask).unwrap();
        let ec = strategy_correlation_tensor(&st, &mask.conjugate(5)).unwrap();
        for (a, b) in e.values().iter().zip(ec.values()) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_roundoff_is_clamped_but_real_negativity_fails() {
        let s = Scenario::new(1, 1, 2).unwrap();
        let t = ProbabilityTable::new(s, vec![1.0 + 5e-16, -5e-16]).unwrap();
        assert_eq!(t.values()[1], 0.0);
        assert!(ProbabilityTable::new(s, vec![1.1, -0.1]).is_err());
        assert!(ProbabilityTable::new(s, vec![0.5, 0.4]).is_err());
    }

    #[test]
    fn strategy_index_round_trip() {
        let s = Scenario::new(2, 2, 3).unwrap();
        for i in [0u128, 1, 17, 80] {
            assert_eq!(DeterministicStrategy::from_index(s, i).index(), i);
        }
        assert_eq!(DeterministicStrategy::from_index(s, 1).assignment(), &[0, 0, 0, 1]);
    }
}
