//! Bell scenarios, roots of unity and conjugation masks.
//!
//! Every tensor in the crate is flattened lexicographically with party 0 as
//! the slowest-varying index. [`MixedRadix`] implements that flattening for
//! settings tuples (radix `k`) and for outcome or mode tuples (radix `d`).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The triple (parties `N`, settings per party `k`, outcomes per measurement `d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Scenario {
    pub parties: usize,
    pub settings: usize,
    pub outcomes: usize,
}

impl Scenario {
    pub fn new(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        if parties == 0 {
            return Err(Error::InvalidScenario("at least one party is required".into()));
        }
        if settings == 0 {
            return Err(Error::InvalidScenario("at least one setting is required".into()));
        }
        if outcomes < 2 {
            return Err(Error::InvalidScenario(format!(
                "measurements need at least two outcomes, got {outcomes}"
            )));
        }
        // Guard the dense tensors against overflow.
        if checked_pow(settings, parties).is_none() || checked_pow(outcomes, parties).is_none() {
            return Err(Error::InvalidScenario(format!(
                "({parties},{settings},{outcomes}) is too large to tabulate"
            )));
        }
        Ok(Self {
            parties,
            settings,
            outcomes,
        })
    }

    /// Re-checks the invariants of a value that bypassed [`Scenario::new`]
    /// (for instance one produced by deserialization).
    pub fn validate(&self) -> Result<()> {
        Scenario::new(self.parties, self.settings, self.outcomes).map(|_| ())
    }

    /// Number of joint settings tuples, `k^N`.
    pub fn num_settings_tuples(&self) -> usize {
        self.settings.pow(self.parties as u32)
    }

    /// Number of joint outcome tuples, `d^N`.
    pub fn num_outcome_tuples(&self) -> usize {
        self.outcomes.pow(self.parties as u32)
    }

    /// Number of deterministic strategies, `d^(N k)`, or `None` if it overflows.
    pub fn num_strategies(&self) -> Option<u128> {
        let exp = (self.parties * self.settings) as u32;
        (self.outcomes as u128).checked_pow(exp)
    }

    pub fn settings_radix(&self) -> MixedRadix {
        MixedRadix::new(self.settings, self.parties)
    }

    pub fn outcome_radix(&self) -> MixedRadix {
        MixedRadix::new(self.outcomes, self.parties)
    }

    pub fn roots(&self) -> RootTable {
        RootTable::new(self.outcomes)
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.parties, self.settings, self.outcomes)
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

/// All settings tuples in canonical order (party 0 slowest).
pub fn settings_tuples(scenario: &Scenario) -> Vec<Vec<usize>> {
    scenario.settings_radix().tuples().collect()
}

/// Lexicographic flattening of tuples over `{0,..,radix-1}^len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixedRadix {
    radix: usize,
    len: usize,
}

impl MixedRadix {
    pub fn new(radix: usize, len: usize) -> Self {
        Self { radix, len }
    }

    pub fn radix(&self) -> usize {
        self.radix
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn size(&self) -> usize {
        self.radix.pow(self.len as u32)
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.len);
        digits.iter().fold(0, |acc, &d| acc * self.radix + d)
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len];
        for slot in out.iter_mut().rev() {
            *slot = index % self.radix;
            index /= self.radix;
        }
        out
    }

    /// Writes the digits of `index` into `out` without allocating.
    pub fn digits_into(&self, mut index: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.radix;
            index /= self.radix;
        }
    }

    pub fn tuples(self) -> impl Iterator<Item = Vec<usize>> {
        (0..self.size()).map(move |i| self.digits(i))
    }

    /// Flat digit table: entry `i * len + p` is digit `p` of index `i`.
    pub fn digit_table(&self) -> Vec<usize> {
        let mut table = vec![0; self.size() * self.len];
        for (i, chunk) in table.chunks_mut(self.len.max(1)).enumerate().take(self.size()) {
            self.digits_into(i, &mut chunk[..self.len]);
        }
        table
    }
}

/// A `d`-th root of unity `exp(2 pi i h / d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootOfUnity {
    order: usize,
    exponent: usize,
}

impl RootOfUnity {
    pub fn new(order: usize, exponent: i64) -> Self {
        assert!(order > 0, "root of unity of order zero");
        let exponent = exponent.rem_euclid(order as i64) as usize;
        Self { order, exponent }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn exponent(&self) -> usize {
        self.exponent
    }

    pub fn value(&self) -> Complex64 {
        root_of_unity(self.order, self.exponent as i64)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.order, -(self.exponent as i64))
    }
}

impl std::ops::Mul for RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.order, rhs.order, "mixed root-of-unity orders");
        RootOfUnity::new(self.order, (self.exponent + rhs.exponent) as i64)
    }
}

/// `exp(2 pi i h / d)` with the exponent reduced mod `d` first.
pub fn root_of_unity(order: usize, exponent: i64) -> Complex64 {
    let h = exponent.rem_euclid(order as i64) as usize;
    // Quarter turns are exact so that d = 2 and d = 4 values stay real or imaginary.
    if (4 * h).is_multiple_of(order) {
        return match 4 * h / order {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * h as f64 / order as f64)
}

/// Precomputed powers `alpha_d^h` for `h = 0..d`.
#[derive(Debug, Clone)]
pub struct RootTable {
    powers: Vec<Complex64>,
}

impl RootTable {
    pub fn new(order: usize) -> Self {
        Self {
            powers: (0..order).map(|h| root_of_unity(order, h as i64)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.powers.len()
    }

    #[inline]
    pub fn pow(&self, exponent: usize) -> Complex64 {
        self.powers[exponent % self.powers.len()]
    }

    pub fn pow_signed(&self, exponent: i64) -> Complex64 {
        self.powers[exponent.rem_euclid(self.powers.len() as i64) as usize]
    }
}

/// Per-party Fourier exponents `r_p`: party `p` contributes `alpha^(r_p a_p)`.
///
/// `r_p = 1` is the plain correlation; `r_p = d - 1` conjugates that party's
/// factor (a starred setting index).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConjugationMask(Vec<usize>);

impl ConjugationMask {
    pub fn new(exponents: Vec<usize>, scenario: &Scenario) -> Result<Self> {
        let mask = Self(exponents);
        mask.check(scenario)?;
        Ok(mask)
    }

    pub fn all_ones(parties: usize) -> Self {
        Self(vec![1; parties])
    }

    pub fn zeros(parties: usize) -> Self {
        Self(vec![0; parties])
    }

    pub fn exponents(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `r -> (d - r) mod d` componentwise.
    pub fn conjugate(&self, outcomes: usize) -> Self {
        Self(self.0.iter().map(|&r| (outcomes - r % outcomes) % outcomes).collect())
    }

    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.0.len() != scenario.parties {
            return Err(Error::MaskLength {
                expected: scenario.parties,
                found: self.0.len(),
            });
        }
        for (party, &value) in self.0.iter().enumerate() {
            if value >= scenario.outcomes {
                return Err(Error::MaskEntry {
                    party,
                    value,
                    outcomes: scenario.outcomes,
                });
            }
        }
        Ok(())
    }
}
