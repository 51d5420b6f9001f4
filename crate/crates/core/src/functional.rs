//! Bell functionals: complex coefficient tensors paired with correlation
//! tensors, read out either as a real part or as a modulus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::{GTable, Pairing};
use crate::correlation::{CorrelationSource, CorrelationTensor, DeterministicStrategy};
use crate::error::{Error, Result};
use crate::scenario::{ConjugationMask, RootTable, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `Re[sum_x c_x E_x]`
    RealPart,
    /// `|sum_x c_x E_x|`
    Modulus,
}

impl Form {
    #[inline]
    pub fn apply(self, z: Complex64) -> f64 {
        match self {
            Form::RealPart => z.re,
            Form::Modulus => z.norm(),
        }
    }
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Form::RealPart => "real_part",
            Form::Modulus => "modulus",
        })
    }
}

/// Coefficients attached to the correlation tensor of one mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalComponent {
    pub mask: ConjugationMask,
    pub coefficients: Vec<Complex64>,
}

/// How a functional was built; carried along for reports only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Pairing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<GTable>,
}

/// A linear functional of one or more correlation tensors.
///
/// Most functionals use a single mask. Expressions with starred settings
/// (mixed conjugations per term) carry one component per distinct mask; the
/// value is taken over the sum of all components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    scenario: Scenario,
    form: Form,
    components: Vec<FunctionalComponent>,
    #[serde(default)]
    provenance: Provenance,
}

impl BellFunctional {
    pub fn new(
        scenario: Scenario,
        mask: ConjugationMask,
        coefficients: Vec<Complex64>,
        form: Form,
    ) -> Result<Self> {
        Self::from_components(
            scenario,
            vec![FunctionalComponent { mask, coefficients }],
            form,
        )
    }

    pub fn from_components(
        scenario: Scenario,
        components: Vec<FunctionalComponent>,
        form: Form,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch("functional without components".into()));
        }
        let n = scenario.num_settings_tuples();
        for comp in &components {
            comp.mask.check(&scenario)?;
            if comp.coefficients.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient tensor for {scenario} needs {n} entries, got {}",
                    comp.coefficients.len()
                )));
            }
        }
        if components
            .iter()
            .flat_map(|c| &c.coefficients)
            .all(|c| *c == Complex64::new(0.0, 0.0))
        {
            return Err(Error::DimensionMismatch("all coefficients vanish".into()));
        }
        Ok(Self {
            scenario,
            form,
            components,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.provenance.label = Some(label.into());
        self
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    /// Replaces the mask of a single-component functional.
    pub fn with_mask(mut self, mask: ConjugationMask) -> Result<Self> {
        mask.check(&self.scenario)?;
        if self.components.len() != 1 {
            return Err(Error::DimensionMismatch(
                "with_mask needs a single-component functional".into(),
            ));
        }
        self.components[0].mask = mask;
        Ok(self)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.components {
            for c in &mut comp.coefficients {
                *c *= factor;
            }
        }
        out
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn components(&self) -> &[FunctionalComponent] {
        &self.components
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The coefficient tensor of a single-mask functional.
    pub fn coefficients(&self) -> Option<&[Complex64]> {
        match self.components.as_slice() {
            [only] => Some(&only.coefficients),
            _ => None,
        }
    }

    pub fn mask(&self) -> Option<&ConjugationMask> {
        match self.components.as_slice() {
            [only] => Some(&only.mask),
            _ => None,
        }
    }

    /// `sum_x c_x E_x` summed over components.
    pub fn raw_sum(&self, source: &dyn CorrelationSource) -> Result<Complex64> {
        if source.scenario() != &self.scenario {
            return Err(Error::DimensionMismatch(format!(
                "functional on {} evaluated on {}",
                self.scenario,
                source.scenario()
            )));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for comp in &self.components {
            let e = source.correlations(&comp.mask)?;
            total += dot(&comp.coefficients, e.values());
        }
        Ok(total)
    }

    pub fn value_on(&self, source: &dyn CorrelationSource) -> Result<f64> {
        Ok(self.form.apply(self.raw_sum(source)?))
    }

    /// Sum on a deterministic strategy, using integer exponent arithmetic.
    pub fn strategy_sum(&self, strategy: &DeterministicStrategy, roots: &RootTable) -> Complex64 {
        let radix = self.scenario.settings_radix();
        let mut digits = vec![0; self.scenario.parties];
        let mut total = Complex64::new(0.0, 0.0);
        for comp in &self.components {
            for (xi, c) in comp.coefficients.iter().enumerate() {
                if *c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                radix.digits_into(xi, &mut digits);
                total += c * roots.pow(strategy.exponent(&digits, &comp.mask));
            }
        }
        total
    }

    /// Sum of moduli of all coefficients; no correlation in the unit disk can
    /// push the functional above this.
    pub fn coefficient_l1_norm(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| &c.coefficients)
            .map(|c| c.norm())
            .sum()
    }
}

fn dot(c: &[Complex64], e: &[Complex64]) -> Complex64 {
    c.iter().zip(e).map(|(a, b)| a * b).sum()
}

/// Value of a single-mask functional on a correlation tensor.
pub fn evaluate_functional(functional: &BellFunctional, e: &CorrelationTensor) -> Result<f64> {
    if functional.scenario() != e.scenario() {
        return Err(Error::DimensionMismatch(format!(
            "functional on {} evaluated on {}",
            functional.scenario(),
            e.scenario()
        )));
    }
    let (Some(mask), Some(coeffs)) = (functional.mask(), functional.coefficients()) else {
        return Err(Error::DimensionMismatch(
            "multi-mask functional needs a correlation source, not a single tensor".into(),
        ));
    };
    if mask != e.mask() {
        return Err(Error::DimensionMismatch(format!(
            "functional mask {:?} differs from tensor mask {:?}",
            mask.exponents(),
            e.mask().exponents()
        )));
    }
    Ok(functional.form().apply(dot(coeffs, e.values())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::strategy_correlation_tensor;
    use crate::scenario::root_of_unity;

    fn chsh() -> BellFunctional {
        let s = Scenario::new(2, 2, 2).unwrap();
        let c = [1.0, 1.0, 1.0, -1.0].map(|v| Complex64::new(v, 0.0)).to_vec();
        BellFunctional::new(s, ConjugationMask::all_ones(2), c, Form::RealPart).unwrap()
    }

    #[test]
    fn chsh_on_its_own_sign_pattern() {
        let f = chsh();
        let e = CorrelationTensor::new(
            *f.scenario(),
            ConjugationMask::all_ones(2),
            [1.0, 1.0, 1.0, -1.0].map(|v| Complex64::new(v, 0.0)).to_vec(),
        )
        .unwrap();
        assert!((evaluate_functional(&f, &e).unwrap() - 4.0).abs() < 1e-15);
        // WW normalization q = c / 4 has value 1 there
        let q = f.scaled(Complex64::new(0.25, 0.0));
        assert!((evaluate_functional(&q, &e).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modulus_of_zero_tensor() {
        let f = chsh().with_form(Form::Modulus);
        let e = CorrelationTensor::zeros(*f.scenario(), ConjugationMask::all_ones(2));
        assert_eq!(evaluate_functional(&f, &e).unwrap(), 0.0);
    }

    #[test]
    fn cglmp_correlation_coefficients_on_zero_strategy() {
        let s = Scenario::new(2, 2, 3).unwrap();
        let a = root_of_unity(3, 1);
        let one = Complex64::new(1.0, 0.0);
        // (0,0): 1-a, (0,1): 1-a^2, (1,0): a-1, (1,1): 1-a
        let c = vec![one - a, one - a * a, a - one, one - a];
        let mask = ConjugationMask::new(vec![1, 2], &s).unwrap();
        let f = BellFunctional::new(s, mask.clone(), c, Form::RealPart).unwrap();
        let e = strategy_correlation_tensor(&DeterministicStrategy::zeros(s), &mask).unwrap();
        assert!((evaluate_functional(&f, &e).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mask_mismatch_is_rejected() {
        let f = chsh();
        let e = CorrelationTensor::zeros(*f.scenario(), ConjugationMask::zeros(2));
        assert!(evaluate_functional(&f, &e).is_err());
    }

    #[test]
    fn vanishing_functional_is_rejected() {
        let s = Scenario::new(1, 2, 2).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert!(BellFunctional::new(s, ConjugationMask::all_ones(1), zero, Form::RealPart).is_err());
    }

    #[test]
    fn strategy_sum_matches_tensor_path() {
        let f = chsh();
        let s = *f.scenario();
        let roots = s.roots();
        for i in 0..16u128 {
            let st = DeterministicStrategy::from_index(s, i);
            let via_tensor = f.raw_sum(&st).unwrap();
            assert!((f.strategy_sum(&st, &roots) - via_tensor).norm() < 1e-12);
        }
    }
}
