//! The three-outcome CGLMP inequality in its probability and correlation
//! forms, the conjugate-basis expansion of its coefficients, and the
//! three-party generalizations built from it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::{build_functional, k2_conjugate_basis, GTable, Pairing};
use crate::correlation::{DeterministicStrategy, ProbabilityTable};
use crate::error::{Error, Result};
use crate::functional::{BellFunctional, Form, FunctionalComponent};
use crate::lhv::{facet_check, FacetReport};
use crate::optimize::{maximize_violation, OptResult, OptimizationConfig};
use crate::scenario::{root_of_unity, ConjugationMask, Scenario};

/// `P(a - b = c | x, y)` entering the probability form, as `(x, y, c, sign)`
/// with 0-based settings and `c` taken mod 3.
pub const PROBABILITY_WEIGHTS: [(usize, usize, usize, f64); 8] = [
    (0, 0, 0, 1.0),
    (1, 0, 2, 1.0),
    (1, 1, 0, 1.0),
    (0, 1, 0, 1.0),
    (0, 0, 2, -1.0),
    (1, 0, 0, -1.0),
    (1, 1, 2, -1.0),
    (0, 1, 1, -1.0),
];

/// Probability form = `CORRELATION_SCALE * correlation form + CORRELATION_OFFSET`.
pub const CORRELATION_SCALE: f64 = 2.0 / 3.0;
pub const CORRELATION_OFFSET: f64 = 0.0;

pub const PROBABILITY_BOUND: f64 = 2.0;
pub const CORRELATION_BOUND: f64 = 3.0;

fn alpha(h: i64) -> Complex64 {
    root_of_unity(3, h)
}

fn cglmp_scenario() -> Scenario {
    Scenario::new(2, 2, 3).expect("valid scenario")
}

fn require(scenario: &Scenario, want: (usize, usize, usize)) -> Result<()> {
    if (scenario.parties, scenario.settings, scenario.outcomes) != want {
        return Err(Error::WrongScenario(format!(
            "expected ({},{},{}), got {scenario}",
            want.0, want.1, want.2
        )));
    }
    Ok(())
}

/// The eight aggregates of the probability form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CglmpTerms {
    /// `P(a = b | 0, 0)`
    pub equal_00: f64,
    /// `P(a = b - 1 | 1, 0)`
    pub minus_10: f64,
    /// `P(a = b | 1, 1)`
    pub equal_11: f64,
    /// `P(a = b | 0, 1)`
    pub equal_01: f64,
    /// `P(a = b - 1 | 0, 0)`
    pub minus_00: f64,
    /// `P(a = b | 1, 0)`
    pub equal_10: f64,
    /// `P(a = b - 1 | 1, 1)`
    pub minus_11: f64,
    /// `P(a = b + 1 | 0, 1)`
    pub plus_01: f64,
}

/// `P(a - b = c mod 3 | x, y)`
pub fn offset_probability(p: &ProbabilityTable, x: usize, y: usize, c: usize) -> f64 {
    let mut total = 0.0;
    for a in 0..3 {
        let b = (a + 3 - c % 3) % 3;
        total += p.get(&[x, y], &[a, b]);
    }
    total
}

impl CglmpTerms {
    pub fn from_table(p: &ProbabilityTable) -> Result<Self> {
        require(p.scenario(), (2, 2, 3))?;
        let q = |x, y, c| offset_probability(p, x, y, c);
        Ok(Self {
            equal_00: q(0, 0, 0),
            minus_10: q(1, 0, 2),
            equal_11: q(1, 1, 0),
            equal_01: q(0, 1, 0),
            minus_00: q(0, 0, 2),
            equal_10: q(1, 0, 0),
            minus_11: q(1, 1, 2),
            plus_01: q(0, 1, 1),
        })
    }

    pub fn value(&self) -> f64 {
        self.equal_00 + self.minus_10 + self.equal_11 + self.equal_01
            - self.minus_00
            - self.equal_10
            - self.minus_11
            - self.plus_01
    }
}

/// Left-hand side of the probability form (bound 2).
pub fn cglmp_probability_value(p: &ProbabilityTable) -> Result<f64> {
    Ok(CglmpTerms::from_table(p)?.value())
}

/// `E = P(a=b) + alpha P(a=b+1) + alpha^2 P(a=b-1)` from `[P(a-b=0), P(a-b=1), P(a-b=2)]`.
pub fn correlation_from_offsets(offsets: [f64; 3]) -> Complex64 {
    (0..3).map(|c| alpha(c as i64) * offsets[c]).sum()
}

/// `P(a - b = c) = (1 + 2 Re[alpha^(-c) E]) / 3`
pub fn offsets_from_correlation(e: Complex64) -> [f64; 3] {
    [0, 1, 2].map(|c| (1.0 + 2.0 * (alpha(-c) * e).re) / 3.0)
}

/// Coefficients of the correlation form on the mask `(1, 2)`:
/// `(0,0): 1-a, (0,1): 1-a^2, (1,0): a-1, (1,1): 1-a`.
pub fn cglmp_correlation_coefficients() -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    vec![one - alpha(1), one - alpha(2), alpha(1) - one, one - alpha(1)]
}

/// `Re[sum c_xy E_xy]` with `E_xy = <alpha^(a - b)>`; bound 3.
pub fn cglmp_correlation_functional() -> BellFunctional {
    let s = cglmp_scenario();
    BellFunctional::new(
        s,
        ConjugationMask::new(vec![1, 2], &s).expect("valid mask"),
        cglmp_correlation_coefficients(),
        Form::RealPart,
    )
    .expect("nonzero coefficients")
    .with_label("cglmp-corr-223")
}

/// The probability form written on correlations; bound 2.
pub fn cglmp_probability_functional() -> BellFunctional {
    cglmp_correlation_functional()
        .scaled(Complex64::new(CORRELATION_SCALE, 0.0))
        .with_label("cglmp-223")
}

/// Evaluates the correlation form on a tensor with mask `(1, 2)`.
pub fn cglmp_correlation_value(e: &crate::correlation::CorrelationTensor) -> Result<f64> {
    require(e.scenario(), (2, 2, 3))?;
    crate::functional::evaluate_functional(&cglmp_correlation_functional(), e)
}

/// Variant with the `(1, 0)` term conjugated: weight `alpha^2 (1 - alpha)` on mask `(2, 1)`.
pub fn cglmp_conjugated_variant() -> BellFunctional {
    let s = cglmp_scenario();
    let zero = Complex64::new(0.0, 0.0);
    let mut plain = cglmp_correlation_coefficients();
    plain[2] = zero;
    let mut starred = vec![zero; 4];
    starred[2] = alpha(2) * (Complex64::new(1.0, 0.0) - alpha(1));
    BellFunctional::from_components(
        s,
        vec![
            FunctionalComponent {
                mask: ConjugationMask::new(vec![1, 2], &s).expect("valid mask"),
                coefficients: plain,
            },
            FunctionalComponent {
                mask: ConjugationMask::new(vec![2, 1], &s).expect("valid mask"),
                coefficients: starred,
            },
        ],
        Form::RealPart,
    )
    .expect("valid components")
    .with_label("cglmp-conjugated-223")
}

/// Exponent table whose conjugate-basis expansion, times 3, is the
/// correlation-form coefficient set (with party 0 as the slowest index).
pub fn cglmp_gtable() -> GTable {
    GTable::new(2, 2, 3, vec![0, 1, 0, 2]).expect("valid table")
}

/// `3 sum_h alpha^g(h) v_h1 (x) v_h2` with the standard dual order.
pub fn cglmp_basis_coefficients(g: &GTable, pairing: Pairing) -> Result<Vec<Complex64>> {
    let s = cglmp_scenario();
    let bases = vec![k2_conjugate_basis(3)?; 2];
    let c = crate::bases::build_coefficients(&s, &bases, g, pairing)?;
    Ok(c.into_iter().map(|v| v * 3.0).collect())
}

/// Affine relation `probability = scale * correlation + offset` obtained by
/// expanding each `P(a - b = c)` through its correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineRelation {
    pub scale: f64,
    pub offset: f64,
}

/// Symbolic expansion of [`PROBABILITY_WEIGHTS`]; fails if the result is not
/// proportional to the correlation-form coefficients.
pub fn derive_affine_relation() -> Result<AffineRelation> {
    // P_c = 1/3 + (2/3) Re[alpha^(-c) E]
    let mut offset = 0.0;
    let mut k = [Complex64::new(0.0, 0.0); 4];
    for &(x, y, c, w) in &PROBABILITY_WEIGHTS {
        offset += w / 3.0;
        k[x * 2 + y] += alpha(-(c as i64)) * (2.0 * w / 3.0);
    }
    let target = cglmp_correlation_coefficients();
    let scale = (k[0] / target[0]).re;
    for (ki, ti) in k.iter().zip(&target) {
        if (ki - ti * scale).norm() > 1e-12 {
            return Err(Error::DimensionMismatch(
                "probability form is not proportional to the correlation form".into(),
            ));
        }
    }
    Ok(AffineRelation { scale, offset })
}

/// `e_00 conj(e_10) e_11 = e_01` for `e_xy = alpha^(a_x + b_y)`.
pub fn bell_numbers_identity_two_party(strategy: &DeterministicStrategy) -> bool {
    let a = |x| strategy.outcome(0, x) as i64;
    let b = |y| strategy.outcome(1, y) as i64;
    let e = |x, y| a(x) + b(y);
    (e(0, 0) - e(1, 0) + e(1, 1) - e(0, 1)).rem_euclid(3) == 0
}

/// `(a_0 b_1* c_1)(a_1* b_0* c_1*)(a_1 b_1 c_0) = a_0 b_0* c_0`.
pub fn bell_numbers_identity_three_party(strategy: &DeterministicStrategy) -> bool {
    let v = |p, x| strategy.outcome(p, x) as i64;
    let (a, b, c) = (|x| v(0, x), |x| v(1, x), |x| v(2, x));
    let lhs = (a(0) - b(1) + c(1)) + (-a(1) - b(0) - c(1)) + (a(1) + b(1) + c(0));
    let rhs = a(0) - b(0) + c(0);
    (lhs - rhs).rem_euclid(3) == 0
}

/// The unconjugated product `e_00 e_10 e_11 = e_01`, which is not an identity.
pub fn unconjugated_product_holds(strategy: &DeterministicStrategy) -> bool {
    let a = |x| strategy.outcome(0, x) as i64;
    let b = |y| strategy.outcome(1, y) as i64;
    let e = |x, y| a(x) + b(y);
    (e(0, 0) + e(1, 0) + e(1, 1) - e(0, 1)).rem_euclid(3) == 0
}

/// The three-party generalization on `(3,2,3)`; bound 3.
pub fn i323_functional() -> BellFunctional {
    let s = Scenario::new(3, 2, 3).expect("valid scenario");
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let index = |x: [usize; 3]| x[0] * 4 + x[1] * 2 + x[2];
    let mut mixed = vec![zero; 8];
    mixed[index([0, 1, 1])] = one - alpha(1);
    mixed[index([0, 0, 0])] = one - alpha(2);
    let mut conjugated = vec![zero; 8];
    conjugated[index([1, 0, 1])] = alpha(2) * (one - alpha(1));
    let mut plain = vec![zero; 8];
    plain[index([1, 1, 0])] = one - alpha(1);
    let mask = |r: Vec<usize>| ConjugationMask::new(r, &s).expect("valid mask");
    BellFunctional::from_components(
        s,
        vec![
            FunctionalComponent {
                mask: mask(vec![1, 2, 1]),
                coefficients: mixed,
            },
            FunctionalComponent {
                mask: mask(vec![2, 2, 2]),
                coefficients: conjugated,
            },
            FunctionalComponent {
                mask: mask(vec![1, 1, 1]),
                coefficients: plain,
            },
        ],
        Form::RealPart,
    )
    .expect("valid components")
    .with_label("i323")
}

pub fn i323_value(source: &dyn crate::correlation::CorrelationSource) -> Result<f64> {
    require(source.scenario(), (3, 2, 3))?;
    i323_functional().value_on(source)
}

/// Amplitude pattern of the reported maximizer, `a|010> + b|020> + ...`,
/// with mode index `9 j_0 + 3 j_1 + j_2`.
pub fn i323_reference_state(a: f64, b: f64, c: f64, d: f64, e: f64) -> Vec<Complex64> {
    let mut s = vec![Complex64::new(0.0, 0.0); 27];
    for (modes, v) in [
        ([0, 1, 0], a),
        ([0, 2, 0], b),
        ([1, 0, 1], c),
        ([1, 2, 1], d),
        ([2, 0, 2], d),
        ([2, 1, 2], e),
        ([0, 0, 0], b),
        ([1, 1, 1], e),
        ([2, 2, 2], c),
    ] {
        s[modes[0] * 9 + modes[1] * 3 + modes[2]] = Complex64::new(v, 0.0);
    }
    s
}

/// Named exponent tables of the tight three-party family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TightPreset {
    G1,
    G2,
    G3,
}

impl TightPreset {
    pub const ALL: [TightPreset; 3] = [TightPreset::G1, TightPreset::G2, TightPreset::G3];

    /// Tables over basis indices `{0,1}^3`, values mod 3.
    pub fn gtable(self) -> GTable {
        GTable::from_fn(3, 2, 3, |h| {
            let (k, l, m) = (h[0], h[1], h[2]);
            match self {
                TightPreset::G1 => i64::from(k == 1 && l == 0 && m == 1),
                TightPreset::G2 => {
                    i64::from(k == 0 && l == 1 && m == 0)
                        + 2 * i64::from(k == 1 && l == 0)
                        + 2 * i64::from(k == 1 && l == 1 && m == 0)
                }
                TightPreset::G3 => i64::from(k == 1 && l == 1),
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TightPreset::G1 => "tight-323-g1",
            TightPreset::G2 => "tight-323-g2",
            TightPreset::G3 => "tight-323-g3",
        }
    }
}

/// `Re[sum_h alpha^g(h) (E, v_h1 (x) v_h2 (x) v_h3)]` on `(3,2,3)`.
pub fn tight_family_functional(g: &GTable) -> Result<BellFunctional> {
    let s = Scenario::new(3, 2, 3)?;
    let bases = vec![k2_conjugate_basis(3)?; 3];
    build_functional(&s, &bases, g, Form::RealPart, Pairing::Bilinear)
}

pub fn three_party_tight_family(
    g: &GTable,
    config: &OptimizationConfig,
) -> Result<(BellFunctional, FacetReport, OptResult)> {
    let f = tight_family_functional(g)?;
    let report = facet_check(&f)?;
    let opt = maximize_violation(&f, config)?;
    Ok((f, report, opt))
}
