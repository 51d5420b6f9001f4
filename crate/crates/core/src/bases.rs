//! Party-local bases and the functionals built from them.
//!
//! A functional is assembled from one basis per party and an exponent table
//! `g` over basis-index tuples:
//!
//! ```text
//! c_x = sum_h alpha_d^g(h) * prod_p u_{h_p}(x_p)
//! ```
//!
//! where `u` is the basis vector itself (bilinear pairing) or its complex
//! conjugate (sesquilinear pairing).

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{BellFunctional, Form, Provenance};
use crate::scenario::{root_of_unity, ConjugationMask, MixedRadix, Scenario};
use crate::correlation::CorrelationTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Coefficients are the unconjugated basis tensors.
    #[default]
    Bilinear,
    /// Coefficients are the conjugated basis tensors.
    Sesquilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    SelfConjugate,
    DeterministicWithDual,
    Explicit,
}

/// Which dual vector gets index 0 in the two-setting conjugate basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualOrder {
    /// `v_0 = (-alpha, 1)/(1 - alpha)`, `v_1 = (1, -1)/(1 - alpha)`.
    #[default]
    Standard,
    /// `v_0 = (1, -1)/(1 - alpha)`, `v_1 = (-alpha, 1)/(1 - alpha)`.
    Swapped,
}

/// A set of vectors of length `k` used to probe one party's settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyBasis {
    kind: BasisKind,
    vectors: Vec<Vec<Complex64>>,
    /// Deterministic-outcome vectors `w_r` dual to `vectors`.
    #[serde(skip_serializing_if = "Option::is_none")]
    deterministic: Option<Vec<Vec<Complex64>>>,
}

/// `sum_x u_x conj(v_x)`
pub fn sesquilinear(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// `sum_x u_x v_x`
pub fn bilinear(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Self-conjugate Fourier basis `v_h = d^(-1/2) (1, alpha^h, .., alpha^((d-1)h))`.
pub fn fourier_party_basis(d: usize) -> Result<PartyBasis> {
    if d < 2 {
        return Err(Error::InvalidScenario(format!("Fourier basis needs d >= 2, got {d}")));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let vectors = (0..d)
        .map(|h| {
            (0..d)
                .map(|x| root_of_unity(d, (h * x) as i64) * norm)
                .collect()
        })
        .collect();
    Ok(PartyBasis {
        kind: BasisKind::SelfConjugate,
        vectors,
        deterministic: None,
    })
}

/// Two-setting conjugate pair for `d >= 3` in the standard dual order.
pub fn k2_conjugate_basis(d: usize) -> Result<PartyBasis> {
    k2_conjugate_basis_ordered(d, DualOrder::Standard)
}

/// Deterministic vectors `w_0 = (1, 1)`, `w_1 = (1, alpha^(d-1))` and their
/// duals under the sesquilinear product.
pub fn k2_conjugate_basis_ordered(d: usize, order: DualOrder) -> Result<PartyBasis> {
    if d < 3 {
        return Err(Error::InvalidScenario(format!(
            "the two-setting conjugate basis needs d >= 3, got {d} (use the Fourier basis)"
        )));
    }
    let one = Complex64::new(1.0, 0.0);
    let alpha = root_of_unity(d, 1);
    let scale = one / (one - alpha);
    let dual_w0 = vec![-alpha * scale, scale];
    let dual_w1 = vec![scale, -scale];
    let w0 = vec![one, one];
    let w1 = vec![one, root_of_unity(d, d as i64 - 1)];
    let (vectors, deterministic) = match order {
        DualOrder::Standard => (vec![dual_w0, dual_w1], vec![w0, w1]),
        DualOrder::Swapped => (vec![dual_w1, dual_w0], vec![w1, w0]),
    };
    Ok(PartyBasis {
        kind: BasisKind::DeterministicWithDual,
        vectors,
        deterministic: Some(deterministic),
    })
}

impl PartyBasis {
    /// User-supplied vectors, all of the same length.
    pub fn explicit(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::DimensionMismatch("explicit basis without vectors".into()));
        };
        let k = first.len();
        if k == 0 || vectors.iter().any(|v| v.len() != k) {
            return Err(Error::DimensionMismatch(
                "explicit basis vectors must share a nonzero length".into(),
            ));
        }
        Ok(Self {
            kind: BasisKind::Explicit,
            vectors,
            deterministic: None,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Length of each vector, i.e. the number of settings `k`.
    pub fn dimension(&self) -> usize {
        self.vectors[0].len()
    }

    /// Number of vectors, the range of each index of `g`.
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn deterministic(&self) -> Option<&[Vec<Complex64>]> {
        self.deterministic.as_deref()
    }

    /// `[(v_h, v_h')]` for the basis itself.
    pub fn gram_matrix(&self) -> Vec<Vec<Complex64>> {
        self.vectors
            .iter()
            .map(|u| self.vectors.iter().map(|v| sesquilinear(u, v)).collect())
            .collect()
    }

    /// `[(w_r, v_s)]`; `None` unless the basis carries deterministic vectors.
    pub fn duality_matrix(&self) -> Option<Vec<Vec<Complex64>>> {
        let w = self.deterministic.as_ref()?;
        Some(
            w.iter()
                .map(|wr| self.vectors.iter().map(|vs| sesquilinear(wr, vs)).collect())
                .collect(),
        )
    }

    fn paired_vectors(&self, pairing: Pairing) -> Vec<Vec<Complex64>> {
        match pairing {
            Pairing::Bilinear => self.vectors.clone(),
            Pairing::Sesquilinear => self
                .vectors
                .iter()
                .map(|v| v.iter().map(|c| c.conj()).collect())
                .collect(),
        }
    }

    fn label(&self) -> &'static str {
        match self.kind {
            BasisKind::SelfConjugate => "fourier",
            BasisKind::DeterministicWithDual => "conjugate",
            BasisKind::Explicit => "explicit",
        }
    }
}

/// Exponents `g(h) in Z_d` over basis-index tuples, flattened like settings
/// tuples (party 0 slowest).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GTable {
    parties: usize,
    indices: usize,
    outcomes: usize,
    values: Vec<usize>,
}

impl GTable {
    pub fn new(parties: usize, indices: usize, outcomes: usize, values: Vec<usize>) -> Result<Self> {
        let expected = indices.pow(parties as u32);
        if values.len() != expected {
            return Err(Error::InvalidGTable(format!(
                "expected {expected} entries, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| v >= outcomes) {
            return Err(Error::InvalidGTable(format!(
                "entry {i} is {v}, outside 0..{outcomes}"
            )));
        }
        Ok(Self {
            parties,
            indices,
            outcomes,
            values,
        })
    }

    /// Tabulates `f(h)`, reducing each value mod `d`.
    pub fn from_fn(
        parties: usize,
        indices: usize,
        outcomes: usize,
        f: impl Fn(&[usize]) -> i64,
    ) -> Self {
        let radix = MixedRadix::new(indices, parties);
        let values = radix
            .tuples()
            .map(|h| f(&h).rem_euclid(outcomes as i64) as usize)
            .collect();
        Self {
            parties,
            indices,
            outcomes,
            values,
        }
    }

    pub fn constant(parties: usize, indices: usize, outcomes: usize, value: usize) -> Self {
        Self::from_fn(parties, indices, outcomes, |_| value as i64)
    }

    /// `g(h) = prod_p (h_p + offset)`; offset 1 reads the indices 1-based.
    pub fn product(parties: usize, indices: usize, outcomes: usize, offset: usize) -> Self {
        Self::from_fn(parties, indices, outcomes, |h| {
            h.iter().map(|&v| (v + offset) as i64).product()
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn indices(&self) -> usize {
        self.indices
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn radix(&self) -> MixedRadix {
        MixedRadix::new(self.indices, self.parties)
    }

    pub fn get(&self, h: &[usize]) -> usize {
        self.values[self.radix().index(h)]
    }

    /// `g + c mod d`
    pub fn shifted(&self, c: usize) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = (*v + c) % self.outcomes;
        }
        out
    }

    /// Nested integer arrays, depth `N`, in canonical order.
    pub fn to_nested(&self) -> serde_json::Value {
        fn build(values: &[usize], depth: usize, k: usize) -> serde_json::Value {
            if depth == 0 {
                return serde_json::Value::from(values[0]);
            }
            let stride = values.len() / k;
            serde_json::Value::Array(
                values
                    .chunks(stride)
                    .map(|chunk| build(chunk, depth - 1, k))
                    .collect(),
            )
        }
        build(&self.values, self.parties, self.indices)
    }

    /// Parses nested arrays of depth `parties` with `indices` entries per
    /// level; errors name the offending location, e.g. `g[1][0]`.
    pub fn from_nested(
        value: &serde_json::Value,
        parties: usize,
        indices: usize,
        outcomes: usize,
    ) -> Result<Self> {
        fn walk(
            value: &serde_json::Value,
            depth: usize,
            indices: usize,
            outcomes: usize,
            path: &mut String,
            out: &mut Vec<usize>,
        ) -> Result<()> {
            if depth == 0 {
                let v = value.as_u64().ok_or_else(|| Error::InvalidDocument {
                    path: path.clone(),
                    message: format!("expected a non-negative integer, found {value}"),
                })?;
                if v as usize >= outcomes {
                    return Err(Error::InvalidDocument {
                        path: path.clone(),
                        message: format!("value {v} is outside 0..{outcomes}"),
                    });
                }
                out.push(v as usize);
                return Ok(());
            }
            let items = value.as_array().ok_or_else(|| Error::InvalidDocument {
                path: path.clone(),
                message: format!("expected an array of {indices} entries, found {value}"),
            })?;
            if items.len() != indices {
                return Err(Error::InvalidDocument {
                    path: path.clone(),
                    message: format!("expected {indices} entries, found {}", items.len()),
                });
            }
            for (i, item) in items.iter().enumerate() {
                let len = path.len();
                path.push_str(&format!("[{i}]"));
                walk(item, depth - 1, indices, outcomes, path, out)?;
                path.truncate(len);
            }
            Ok(())
        }
        let mut out = Vec::with_capacity(indices.pow(parties as u32));
        let mut path = String::from("g");
        walk(value, parties, indices, outcomes, &mut path, &mut out)?;
        Self::new(parties, indices, outcomes, out)
    }
}

impl Serialize for GTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            outcomes: usize,
            table: serde_json::Value,
        }
        Repr {
            outcomes: self.outcomes,
            table: self.to_nested(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            outcomes: usize,
            table: serde_json::Value,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut parties = 0;
        let mut indices = 0;
        let mut cursor = &repr.table;
        while let Some(items) = cursor.as_array() {
            parties += 1;
            indices = items.len();
            match items.first() {
                Some(first) => cursor = first,
                None => break,
            }
        }
        GTable::from_nested(&repr.table, parties, indices, repr.outcomes)
            .map_err(serde::de::Error::custom)
    }
}

/// Coefficient tensor of `sum_h alpha^g(h) u_h1 (x) .. (x) u_hN`.
pub fn build_coefficients(
    scenario: &Scenario,
    bases: &[PartyBasis],
    g: &GTable,
    pairing: Pairing,
) -> Result<Vec<Complex64>> {
    if bases.len() != scenario.parties {
        return Err(Error::DimensionMismatch(format!(
            "{} bases for {} parties",
            bases.len(),
            scenario.parties
        )));
    }
    for (p, b) in bases.iter().enumerate() {
        if b.dimension() != scenario.settings {
            return Err(Error::DimensionMismatch(format!(
                "basis of party {p} has vectors of length {}, scenario has k = {}",
                b.dimension(),
                scenario.settings
            )));
        }
        if b.count() != g.indices() {
            return Err(Error::InvalidGTable(format!(
                "basis of party {p} has {} vectors but g ranges over {} indices",
                b.count(),
                g.indices()
            )));
        }
    }
    if g.parties() != scenario.parties {
        return Err(Error::InvalidGTable(format!(
            "g has {} indices per entry, scenario has {} parties",
            g.parties(),
            scenario.parties
        )));
    }
    if g.outcomes() != scenario.outcomes {
        return Err(Error::InvalidGTable(format!(
            "g takes values mod {}, scenario has d = {}",
            g.outcomes(),
            scenario.outcomes
        )));
    }
    let paired: Vec<Vec<Vec<Complex64>>> = bases.iter().map(|b| b.paired_vectors(pairing)).collect();
    let settings = scenario.settings_radix();
    let roots = scenario.roots();
    let mut coefficients = vec![Complex64::new(0.0, 0.0); settings.size()];
    for (hi, h) in g.radix().tuples().enumerate() {
        let phase = roots.pow(g.values()[hi]);
        for (xi, x) in settings.tuples().enumerate() {
            let term = h
                .iter()
                .zip(&x)
                .enumerate()
                .fold(phase, |acc, (p, (&hp, &xp))| acc * paired[p][hp][xp]);
            coefficients[xi] += term;
        }
    }
    Ok(coefficients)
}

/// Builds the functional `I = F[sum_h alpha^g(h) (E, u_h1 (x) .. (x) u_hN)]`
/// with the all-ones mask.
pub fn build_functional(
    scenario: &Scenario,
    bases: &[PartyBasis],
    g: &GTable,
    form: Form,
    pairing: Pairing,
) -> Result<BellFunctional> {
    let coefficients = build_coefficients(scenario, bases, g, pairing)?;
    let provenance = Provenance {
        label: None,
        basis: Some(bases[0].label().to_string()),
        pairing: Some(pairing),
        g: Some(g.clone()),
    };
    Ok(BellFunctional::new(
        *scenario,
        ConjugationMask::all_ones(scenario.parties),
        coefficients,
        form,
    )?
    .with_provenance(provenance))
}

/// A sign function `f: {0,1}^N -> {+1,-1}` in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignFunction {
    parties: usize,
    signs: Vec<i8>,
}

impl SignFunction {
    pub fn new(parties: usize, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != 1 << parties {
            return Err(Error::DimensionMismatch(format!(
                "sign function on {parties} parties needs {} entries, got {}",
                1usize << parties,
                signs.len()
            )));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::DimensionMismatch("sign entries must be +1 or -1".into()));
        }
        Ok(Self { parties, signs })
    }

    /// Sign function with bit `i` of `code` set meaning `f(r_i) = -1`.
    pub fn from_code(parties: usize, code: u64) -> Self {
        let signs = (0..1usize << parties)
            .map(|i| if code >> i & 1 == 1 { -1 } else { 1 })
            .collect();
        Self { parties, signs }
    }

    /// All `2^(2^N)` sign functions.
    pub fn all(parties: usize) -> impl Iterator<Item = SignFunction> {
        (0..1u64 << (1u64 << parties)).map(move |code| Self::from_code(parties, code))
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, r: &[usize]) -> i8 {
        self.signs[MixedRadix::new(2, self.parties).index(r)]
    }

    /// True when `f(r) = prod_p a_p(r_p)` for single-party sign functions.
    pub fn factorizes(&self) -> bool {
        let radix = MixedRadix::new(2, self.parties);
        let f0 = self.signs[0];
        // f(e_p) / f(0) fixes each single-party ratio
        let unit: Vec<i8> = (0..self.parties)
            .map(|p| {
                let mut r = vec![0; self.parties];
                r[p] = 1;
                self.signs[radix.index(&r)] * f0
            })
            .collect();
        radix.tuples().enumerate().all(|(i, r)| {
            let predicted = r
                .iter()
                .zip(&unit)
                .filter(|(&bit, _)| bit == 1)
                .fold(f0, |acc, (_, &u)| acc * u);
            predicted == self.signs[i]
        })
    }

    /// Same function written as an exponent table `g` with `f = (-1)^g`.
    pub fn to_gtable(&self) -> GTable {
        let values = self.signs.iter().map(|&s| usize::from(s < 0)).collect();
        GTable::new(self.parties, 2, 2, values).expect("sign table has the right shape")
    }
}

/// `q(x) = 2^(-N) sum_r f(r) (-1)^(r . x)`.
pub fn ww_coefficients(f: &SignFunction) -> Vec<f64> {
    let n = f.parties();
    let radix = MixedRadix::new(2, n);
    let norm = 1.0 / (1u64 << n) as f64;
    radix
        .tuples()
        .map(|x| {
            radix
                .tuples()
                .zip(f.signs())
                .map(|(r, &s)| {
                    let dot: usize = r.iter().zip(&x).map(|(a, b)| a * b).sum();
                    let sign = if dot.is_multiple_of(2) { 1.0 } else { -1.0 };
                    s as f64 * sign
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// `sum_x q(x) E_x` as a real-part functional on `(N,2,2)`.
pub fn ww_functional(f: &SignFunction) -> Result<BellFunctional> {
    let scenario = Scenario::new(f.parties(), 2, 2)?;
    let coefficients = ww_coefficients(f)
        .into_iter()
        .map(|q| Complex64::new(q, 0.0))
        .collect();
    Ok(BellFunctional::new(
        scenario,
        ConjugationMask::all_ones(f.parties()),
        coefficients,
        Form::RealPart,
    )?
    .with_label("ww"))
}

/// Pairings `(E, u_h1 (x) .. (x) u_hN)` for every index tuple `h`.
pub fn basis_pairings(
    e: &CorrelationTensor,
    bases: &[PartyBasis],
    pairing: Pairing,
) -> Result<Vec<Complex64>> {
    let scenario = e.scenario();
    let count = bases.first().map(PartyBasis::count).unwrap_or(0);
    if bases.len() != scenario.parties
        || bases
            .iter()
            .any(|b| b.dimension() != scenario.settings || b.count() != count)
    {
        return Err(Error::DimensionMismatch(format!(
            "bases do not match scenario {scenario}"
        )));
    }
    let g = GTable::constant(scenario.parties, count, scenario.outcomes, 0);
    let paired: Vec<Vec<Vec<Complex64>>> = bases.iter().map(|b| b.paired_vectors(pairing)).collect();
    let settings = scenario.settings_radix();
    Ok(g
        .radix()
        .tuples()
        .map(|h| {
            settings
                .tuples()
                .zip(e.values())
                .map(|(x, ex)| {
                    h.iter()
                        .zip(&x)
                        .enumerate()
                        .fold(*ex, |acc, (p, (&hp, &xp))| acc * paired[p][hp][xp])
                })
                .sum()
        })
        .collect())
}

/// `sum_h |(E, u_h1 (x) .. (x) u_hN)|`
pub fn wwzb_nonlinear(e: &CorrelationTensor, bases: &[PartyBasis], pairing: Pairing) -> Result<f64> {
    Ok(basis_pairings(e, bases, pairing)?.iter().map(|z| z.norm()).sum())
}

/// Fourier basis for `k = d = 2`, conjugate pair otherwise (`k = 2`).
pub fn default_bases(scenario: &Scenario, order: DualOrder) -> Result<Vec<PartyBasis>> {
    let basis = match (scenario.settings, scenario.outcomes) {
        (k, d) if k == d => fourier_party_basis(d)?,
        (2, d) => k2_conjugate_basis_ordered(d, order)?,
        (k, d) => {
            return Err(Error::InvalidScenario(format!(
                "no built-in basis for k = {k}, d = {d}"
            )))
        }
    };
    Ok(vec![basis; scenario.parties])
}

/// The `(1, 1)/sqrt(2)`, `(1, -1)/sqrt(2)` pair, exposed for readability in tests.
pub fn dichotomic_fourier_vectors() -> [[f64; 2]; 2] {
    [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]
}
