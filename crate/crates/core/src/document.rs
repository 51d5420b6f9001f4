//! JSON documents describing functionals and setups, and the built-in presets.
//!
//! A functional document names its scenario and form and then gives the
//! functional in one of three ways:
//!
//! * `basis` + `g` (+ optional `pairing`, `mask`): the conjugate-basis
//!   construction, with `g` as nested integer arrays;
//! * `terms`: a list of `{settings, mask, weight | alpha_poly}` entries, where
//!   `alpha_poly: [w0, w1, ..]` stands for `w0 + w1 alpha + ..`;
//! * `components`: explicit `{mask, coefficients}` blocks with
//!   coefficients as `[re, im]` pairs in canonical order.
//!
//! An optional `scale` multiplies every coefficient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::{
    build_functional, fourier_party_basis, k2_conjugate_basis_ordered, DualOrder, GTable, Pairing,
    PartyBasis,
};
use crate::error::{Error, Result};
use crate::functional::{BellFunctional, Form, FunctionalComponent, Provenance};
use crate::multiport::{QuantumSetup, SetupDocument};
use crate::scenario::{root_of_unity, ConjugationMask, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChoice {
    Fourier,
    Conjugate,
    ConjugateSwapped,
}

/// One weighted correlation `w E_x(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskedTerm {
    pub settings: Vec<usize>,
    pub mask: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_poly: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDocument {
    pub mask: Vec<usize>,
    pub coefficients: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    pub scenario: Scenario,
    pub form: Form,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Pairing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<MaskedTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

fn doc_error(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidDocument {
        path: path.into(),
        message: message.into(),
    }
}

fn from_serde(e: serde_json::Error) -> Error {
    doc_error(format!("line {} column {}", e.line(), e.column()), e.to_string())
}

pub fn parse_functional_spec(text: &str) -> Result<FunctionalSpec> {
    let spec: FunctionalSpec = serde_json::from_str(text).map_err(from_serde)?;
    spec.scenario
        .validate()
        .map_err(|e| doc_error("scenario", e.to_string()))?;
    Ok(spec)
}

pub fn parse_setup(text: &str) -> Result<QuantumSetup> {
    let doc: SetupDocument = serde_json::from_str(text).map_err(from_serde)?;
    QuantumSetup::try_from(doc)
}

fn mask_at(path: &str, r: &[usize], scenario: &Scenario) -> Result<ConjugationMask> {
    ConjugationMask::new(r.to_vec(), scenario).map_err(|e| doc_error(path, e.to_string()))
}

impl FunctionalSpec {
    pub fn build(&self) -> Result<BellFunctional> {
        self.build_with_pairing(None)
    }

    /// Builds the functional; `pairing` overrides the document's pairing.
    pub fn build_with_pairing(&self, pairing: Option<Pairing>) -> Result<BellFunctional> {
        let s = self.scenario;
        let given = [self.basis.is_some(), self.terms.is_some(), self.components.is_some()];
        if given.iter().filter(|&&b| b).count() != 1 {
            return Err(doc_error(
                "$",
                "exactly one of `basis`, `terms` or `components` must be given",
            ));
        }
        let mut f = if let Some(basis) = self.basis {
            self.build_from_basis(basis, pairing.or(self.pairing).unwrap_or_default())?
        } else if let Some(terms) = &self.terms {
            self.build_from_terms(terms)?
        } else {
            let comps = self.components.as_ref().expect("checked above");
            let mut out = Vec::with_capacity(comps.len());
            for (i, c) in comps.iter().enumerate() {
                out.push(FunctionalComponent {
                    mask: mask_at(&format!("components[{i}].mask"), &c.mask, &s)?,
                    coefficients: c.coefficients.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
                });
            }
            BellFunctional::from_components(s, out, self.form)?
        };
        if let Some(scale) = self.scale {
            let provenance = f.provenance().clone();
            f = f.scaled(Complex64::new(scale, 0.0)).with_provenance(provenance);
        }
        if let Some(label) = &self.label {
            f = f.with_label(label.clone());
        }
        Ok(f)
    }

    fn build_from_basis(&self, basis: BasisChoice, pairing: Pairing) -> Result<BellFunctional> {
        let s = self.scenario;
        let party: PartyBasis = match basis {
            BasisChoice::Fourier => {
                if s.settings != s.outcomes {
                    return Err(doc_error("basis", "the Fourier basis needs k = d"));
                }
                fourier_party_basis(s.outcomes)?
            }
            BasisChoice::Conjugate | BasisChoice::ConjugateSwapped => {
                if s.settings != 2 {
                    return Err(doc_error("basis", "the conjugate basis needs k = 2"));
                }
                let order = if basis == BasisChoice::Conjugate {
                    DualOrder::Standard
                } else {
                    DualOrder::Swapped
                };
                k2_conjugate_basis_ordered(s.outcomes, order).map_err(|e| doc_error("basis", e.to_string()))?
            }
        };
        let g_value = self.g.as_ref().ok_or_else(|| doc_error("g", "missing g table"))?;
        let g = GTable::from_nested(g_value, s.parties, party.count(), s.outcomes)?;
        let bases = vec![party; s.parties];
        let f = build_functional(&s, &bases, &g, self.form, pairing)?;
        match &self.mask {
            Some(r) => f.with_mask(mask_at("mask", r, &s)?),
            None => Ok(f),
        }
    }

    fn build_from_terms(&self, terms: &[MaskedTerm]) -> Result<BellFunctional> {
        let s = self.scenario;
        let radix = s.settings_radix();
        let mut comps: Vec<FunctionalComponent> = Vec::new();
        for (i, t) in terms.iter().enumerate() {
            let path = format!("terms[{i}]");
            if t.settings.len() != s.parties || t.settings.iter().any(|&x| x >= s.settings) {
                return Err(doc_error(
                    format!("{path}.settings"),
                    format!("expected {} settings in 0..{}", s.parties, s.settings),
                ));
            }
            let mask = mask_at(&format!("{path}.mask"), &t.mask, &s)?;
            let weight = match (&t.weight, &t.alpha_poly) {
                (Some([re, im]), None) => Complex64::new(*re, *im),
                (None, Some(poly)) => poly
                    .iter()
                    .enumerate()
                    .map(|(h, w)| root_of_unity(s.outcomes, h as i64) * *w)
                    .sum(),
                _ => return Err(doc_error(path, "give exactly one of `weight` or `alpha_poly`")),
            };
            let slot = match comps.iter().position(|c| c.mask == mask) {
                Some(j) => j,
                None => {
                    comps.push(FunctionalComponent {
                        mask,
                        coefficients: vec![Complex64::new(0.0, 0.0); radix.size()],
                    });
                    comps.len() - 1
                }
            };
            comps[slot].coefficients[radix.index(&t.settings)] += weight;
        }
        BellFunctional::from_components(s, comps, self.form)
    }

    /// Explicit-coefficient document for any functional.
    pub fn from_functional(f: &BellFunctional) -> Self {
        let Provenance { label, .. } = f.provenance().clone();
        Self {
            scenario: *f.scenario(),
            form: f.form(),
            label,
            basis: None,
            pairing: None,
            g: None,
            mask: None,
            terms: None,
            components: Some(
                f.components()
                    .iter()
                    .map(|c| ComponentDocument {
                        mask: c.mask.exponents().to_vec(),
                        coefficients: c.coefficients.iter().map(|z| [z.re, z.im]).collect(),
                    })
                    .collect(),
            ),
            scale: None,
        }
    }
}

const CHSH: &str = r#"{
  "label": "chsh",
  "scenario": {"parties": 2, "settings": 2, "outcomes": 2},
  "form": "real_part",
  "basis": "fourier",
  "pairing": "bilinear",
  "g": [[0, 0], [0, 1]]
}"#;

const CGLMP_CORR_223: &str = r#"{
  "label": "cglmp-corr-223",
  "scenario": {"parties": 2, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "terms": [
    {"settings": [0, 0], "mask": [1, 2], "alpha_poly": [1, -1]},
    {"settings": [0, 1], "mask": [1, 2], "alpha_poly": [1, 0, -1]},
    {"settings": [1, 0], "mask": [1, 2], "alpha_poly": [-1, 1]},
    {"settings": [1, 1], "mask": [1, 2], "alpha_poly": [1, -1]}
  ]
}"#;

const CGLMP_223: &str = r#"{
  "label": "cglmp-223",
  "scenario": {"parties": 2, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "scale": 0.6666666666666666,
  "terms": [
    {"settings": [0, 0], "mask": [1, 2], "alpha_poly": [1, -1]},
    {"settings": [0, 1], "mask": [1, 2], "alpha_poly": [1, 0, -1]},
    {"settings": [1, 0], "mask": [1, 2], "alpha_poly": [-1, 1]},
    {"settings": [1, 1], "mask": [1, 2], "alpha_poly": [1, -1]}
  ]
}"#;

const I323: &str = r#"{
  "label": "i323",
  "scenario": {"parties": 3, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "terms": [
    {"settings": [0, 1, 1], "mask": [1, 2, 1], "alpha_poly": [1, -1]},
    {"settings": [1, 0, 1], "mask": [2, 2, 2], "alpha_poly": [0, 0, 1, -1]},
    {"settings": [1, 1, 0], "mask": [1, 1, 1], "alpha_poly": [1, -1]},
    {"settings": [0, 0, 0], "mask": [1, 2, 1], "alpha_poly": [1, 0, -1]}
  ]
}"#;

const TIGHT_G1: &str = r#"{
  "label": "tight-323-g1",
  "scenario": {"parties": 3, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "basis": "conjugate",
  "pairing": "bilinear",
  "g": [[[0, 0], [0, 0]], [[0, 1], [0, 0]]]
}"#;

const TIGHT_G2: &str = r#"{
  "label": "tight-323-g2",
  "scenario": {"parties": 3, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "basis": "conjugate",
  "pairing": "bilinear",
  "g": [[[0, 0], [1, 0]], [[2, 2], [2, 0]]]
}"#;

const TIGHT_G3: &str = r#"{
  "label": "tight-323-g3",
  "scenario": {"parties": 3, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "basis": "conjugate",
  "pairing": "bilinear",
  "g": [[[0, 0], [0, 0]], [[0, 0], [1, 1]]]
}"#;

const TRIVIAL_223: &str = r#"{
  "label": "trivial-223",
  "scenario": {"parties": 2, "settings": 2, "outcomes": 3},
  "form": "real_part",
  "terms": [
    {"settings": [0, 0], "mask": [1, 1], "weight": [1, 0]}
  ]
}"#;

pub const PRESET_NAMES: [&str; 8] = [
    "chsh",
    "cglmp-223",
    "cglmp-corr-223",
    "i323",
    "tight-323-g1",
    "tight-323-g2",
    "tight-323-g3",
    "trivial-223",
];

/// Embedded document text of a preset.
pub fn preset_document(name: &str) -> Option<&'static str> {
    Some(match name {
        "chsh" => CHSH,
        "cglmp-223" => CGLMP_223,
        "cglmp-corr-223" => CGLMP_CORR_223,
        "i323" => I323,
        "tight-323-g1" => TIGHT_G1,
        "tight-323-g2" => TIGHT_G2,
        "tight-323-g3" => TIGHT_G3,
        "trivial-223" => TRIVIAL_223,
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<FunctionalSpec> {
    let text = preset_document(name).ok_or_else(|| {
        doc_error(
            "preset",
            format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", ")),
        )
    })?;
    parse_functional_spec(text)
}
