//! Interferometric measurements: per-port phase shifters followed by a
//! symmetric Fourier multiport on every party.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::{CorrelationSource, CorrelationTensor, ProbabilityTable};
use crate::error::{Error, Result};
use crate::scenario::{root_of_unity, ConjugationMask, Scenario};

/// Normalization tolerance on states.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// `M_uj = d^(-1/2) alpha^(u j)`
#[derive(Debug, Clone, PartialEq)]
pub struct MultiportUnitary {
    dimension: usize,
    matrix: DMatrix<Complex64>,
}

pub fn fourier_multiport(d: usize) -> Result<MultiportUnitary> {
    if d < 2 {
        return Err(Error::InvalidScenario(format!("multiport needs d >= 2, got {d}")));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let matrix = DMatrix::from_fn(d, d, |u, j| root_of_unity(d, (u * j) as i64) * norm);
    Ok(MultiportUnitary { dimension: d, matrix })
}

impl MultiportUnitary {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, u: usize, j: usize) -> Complex64 {
        self.matrix[(u, j)]
    }

    /// `max |(M M^dagger - 1)_ij|`
    pub fn unitarity_defect(&self) -> f64 {
        let product = &self.matrix * self.matrix.adjoint();
        let identity = DMatrix::<Complex64>::identity(self.dimension, self.dimension);
        (product - identity).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// A pure state on `d^N` modes and the phase settings of every party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetupDocument", into = "SetupDocument")]
pub struct QuantumSetup {
    scenario: Scenario,
    state: Vec<Complex64>,
    /// Entry `(p * k + x) * d + t` is the phase on port `t` of party `p` under setting `x`.
    phases: Vec<f64>,
}

impl QuantumSetup {
    /// Checks normalization and the port-0 phase gauge.
    pub fn new(scenario: Scenario, state: Vec<Complex64>, phases: Vec<f64>) -> Result<Self> {
        Self::check_shape(&scenario, &state, &phases)?;
        let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::InvalidSetup(format!("state has squared norm {norm}")));
        }
        let d = scenario.outcomes;
        if let Some(row) = phases.chunks(d).position(|row| row[0] != 0.0) {
            return Err(Error::InvalidSetup(format!(
                "phase on port 0 of party {} setting {} must be 0",
                row / scenario.settings,
                row % scenario.settings
            )));
        }
        Ok(Self {
            scenario,
            state,
            phases,
        })
    }

    /// Normalizes the state and shifts each phase row so port 0 reads 0.
    pub fn from_raw(scenario: Scenario, mut state: Vec<Complex64>, mut phases: Vec<f64>) -> Result<Self> {
        Self::check_shape(&scenario, &state, &phases)?;
        let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidSetup("state vector vanishes".into()));
        }
        for z in &mut state {
            *z /= norm;
        }
        for row in phases.chunks_mut(scenario.outcomes) {
            let offset = row[0];
            for v in row.iter_mut() {
                *v -= offset;
            }
        }
        Ok(Self {
            scenario,
            state,
            phases,
        })
    }

    /// `s = u_0 (x) u_1 (x) ..`, normalized.
    pub fn product(scenario: Scenario, factors: &[Vec<Complex64>], phases: Vec<f64>) -> Result<Self> {
        if factors.len() != scenario.parties || factors.iter().any(|f| f.len() != scenario.outcomes) {
            return Err(Error::DimensionMismatch(
                "product state needs one length-d factor per party".into(),
            ));
        }
        let state = scenario
            .outcome_radix()
            .tuples()
            .map(|j| {
                j.iter()
                    .enumerate()
                    .fold(Complex64::new(1.0, 0.0), |acc, (p, &jp)| acc * factors[p][jp])
            })
            .collect();
        Self::from_raw(scenario, state, phases)
    }

    fn check_shape(scenario: &Scenario, state: &[Complex64], phases: &[f64]) -> Result<()> {
        scenario.validate()?;
        if state.len() != scenario.num_outcome_tuples() {
            return Err(Error::DimensionMismatch(format!(
                "state for {scenario} needs {} amplitudes, got {}",
                scenario.num_outcome_tuples(),
                state.len()
            )));
        }
        let want = scenario.parties * scenario.settings * scenario.outcomes;
        if phases.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "setup for {scenario} needs {want} phases, got {}",
                phases.len()
            )));
        }
        if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || phases.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSetup("non-finite amplitude or phase".into()));
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &[Complex64] {
        &self.state
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    #[inline]
    pub fn phase(&self, party: usize, setting: usize, port: usize) -> f64 {
        self.phases[(party * self.scenario.settings + setting) * self.scenario.outcomes + port]
    }

    /// Setup with `delta` added to every phase of one (party, setting); the
    /// gauge is restored afterwards.
    pub fn with_phase_offset(&self, party: usize, setting: usize, delta: f64) -> Self {
        let mut phases = self.phases.clone();
        let d = self.scenario.outcomes;
        let row = (party * self.scenario.settings + setting) * d;
        for v in &mut phases[row..row + d] {
            *v += delta;
        }
        Self::from_raw(self.scenario, self.state.clone(), phases).expect("shape is unchanged")
    }

    /// `t_j = prod_p e^(i phi[p][x_p][j_p]) s_j`, the state after the phase shifters.
    pub fn shifted_state(&self, settings: &[usize]) -> Vec<Complex64> {
        let radix = self.scenario.outcome_radix();
        let mut j = vec![0; self.scenario.parties];
        self.state
            .iter()
            .enumerate()
            .map(|(ji, s)| {
                radix.digits_into(ji, &mut j);
                let phase: f64 = j
                    .iter()
                    .enumerate()
                    .map(|(p, &jp)| self.phase(p, settings[p], jp))
                    .sum();
                s * Complex64::from_polar(1.0, phase)
            })
            .collect()
    }
}

/// `p(a|x) = |<a| (M (x) .. (x) M) Phi_x |s>|^2` for every outcome tuple `a`.
pub fn born_probabilities(setup: &QuantumSetup, settings: &[usize]) -> Vec<f64> {
    let scenario = setup.scenario;
    let d = scenario.outcomes;
    let m = fourier_multiport(d).expect("scenario has d >= 2");
    let mut amp = setup.shifted_state(settings);
    // apply M on each tensor axis in turn
    let total = amp.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); d];
    for p in 0..scenario.parties {
        let stride = d.pow((scenario.parties - 1 - p) as u32);
        for base in 0..total {
            if !(base / stride).is_multiple_of(d) {
                continue;
            }
            for (u, slot) in scratch.iter_mut().enumerate() {
                *slot = (0..d).map(|j| m.entry(u, j) * amp[base + j * stride]).sum();
            }
            for (u, v) in scratch.iter().enumerate() {
                amp[base + u * stride] = *v;
            }
        }
    }
    amp.iter().map(|z| z.norm_sqr()).collect()
}

/// Born-rule probabilities for every settings tuple.
pub fn probability_table(setup: &QuantumSetup) -> Result<ProbabilityTable> {
    let scenario = setup.scenario;
    let mut p = Vec::with_capacity(scenario.num_settings_tuples() * scenario.num_outcome_tuples());
    for x in scenario.settings_radix().tuples() {
        p.extend(born_probabilities(setup, &x));
    }
    ProbabilityTable::new(scenario, p)
}

/// `E_x(r) = sum_j t_j conj(t_(j + r))` with `t` the phase-shifted state.
pub fn quantum_correlation_tensor(setup: &QuantumSetup, mask: &ConjugationMask) -> Result<CorrelationTensor> {
    let scenario = setup.scenario;
    mask.check(&scenario)?;
    let radix = scenario.outcome_radix();
    let d = scenario.outcomes;
    let r = mask.exponents();
    let shift: Vec<usize> = (0..radix.size())
        .map(|ji| {
            let j = radix.digits(ji);
            let shifted: Vec<usize> = j.iter().zip(r).map(|(a, b)| (a + b) % d).collect();
            radix.index(&shifted)
        })
        .collect();
    let values = scenario
        .settings_radix()
        .tuples()
        .map(|x| {
            let t = setup.shifted_state(&x);
            t.iter()
                .zip(&shift)
                .map(|(tj, &jr)| tj * t[jr].conj())
                .sum()
        })
        .collect();
    CorrelationTensor::new(scenario, mask.clone(), values)
}

impl CorrelationSource for QuantumSetup {
    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn correlations(&self, mask: &ConjugationMask) -> Result<CorrelationTensor> {
        quantum_correlation_tensor(self, mask)
    }
}

/// Serialized form of a [`QuantumSetup`]: amplitudes as `[re, im]` pairs in
/// canonical mode order, phases nested as `[party][setting][port]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupDocument {
    pub scenario: Scenario,
    pub amplitudes: Vec<[f64; 2]>,
    pub phases: Vec<Vec<Vec<f64>>>,
}

impl From<QuantumSetup> for SetupDocument {
    fn from(setup: QuantumSetup) -> Self {
        let k = setup.scenario.settings;
        let d = setup.scenario.outcomes;
        let phases = setup
            .phases
            .chunks(k * d)
            .map(|party| party.chunks(d).map(|row| row.to_vec()).collect())
            .collect();
        Self {
            scenario: setup.scenario,
            amplitudes: setup.state.iter().map(|z| [z.re, z.im]).collect(),
            phases,
        }
    }
}

impl TryFrom<SetupDocument> for QuantumSetup {
    type Error = Error;

    /// Normalizes the amplitudes and gauge-fixes the phases.
    fn try_from(doc: SetupDocument) -> Result<Self> {
        doc.scenario.validate()?;
        let s = doc.scenario;
        if doc.phases.len() != s.parties {
            return Err(Error::InvalidDocument {
                path: "phases".into(),
                message: format!("expected {} parties, found {}", s.parties, doc.phases.len()),
            });
        }
        let mut phases = Vec::with_capacity(s.parties * s.settings * s.outcomes);
        for (p, party) in doc.phases.iter().enumerate() {
            if party.len() != s.settings {
                return Err(Error::InvalidDocument {
                    path: format!("phases[{p}]"),
                    message: format!("expected {} settings, found {}", s.settings, party.len()),
                });
            }
            for (x, row) in party.iter().enumerate() {
                if row.len() != s.outcomes {
                    return Err(Error::InvalidDocument {
                        path: format!("phases[{p}][{x}]"),
                        message: format!("expected {} ports, found {}", s.outcomes, row.len()),
                    });
                }
                phases.extend_from_slice(row);
            }
        }
        let state = doc.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        QuantumSetup::from_raw(s, state, phases)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::correlation_from_probabilities;

    #[test]
    fn fourier_multiport_d3() {
        let m = fourier_multiport(3).unwrap();
        let a = root_of_unity(3, 1);
        let n = 1.0 / 3f64.sqrt();
        let want = [[1.0.into(), 1.0.into(), 1.0.into()], [1.0.into(), a, a * a], [1.0.into(), a * a, a]];
        for (u, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((m.entry(u, j) - w * n).norm() < 1e-15);
            }
        }
        assert!(m.unitarity_defect() < 1e-12);
    }

    #[test]
    fn fourier_multiport_d2() {
        let m = fourier_multiport(2).unwrap();
        let n = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.entry(1, 1) - Complex64::new(-n, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn point_mass_gives_flat_distribution() {
        let s = Scenario::new(2, 2, 3).unwrap();
        let mut state = vec![Complex64::new(0.0, 0.0); 9];
        state[0] = 1.0.into();
        let setup = QuantumSetup::new(s, state, vec![0.0; 12]).unwrap();
        for p in born_probabilities(&setup, &[0, 1]) {
            assert!((p - 1.0 / 9.0).abs() < 1e-12);
        }
        let e = quantum_correlation_tensor(&setup, &ConjugationMask::all_ones(2)).unwrap();
        assert!(e.values().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn maximally_entangled_qutrits() {
        let s = Scenario::new(2, 2, 3).unwrap();
        let mut state = vec![Complex64::new(0.0, 0.0); 9];
        for j in 0..3 {
            state[j * 3 + j] = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
        }
        let setup = QuantumSetup::new(s, state, vec![0.0; 12]).unwrap();
        let p = born_probabilities(&setup, &[0, 0]);
        for a in 0..3 {
            for b in 0..3 {
                let want = if (a + b) % 3 == 0 { 1.0 / 3.0 } else { 0.0 };
                assert!((p[a * 3 + b] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_matches_born_path() {
        let s = Scenario::new(2, 2, 3).unwrap();
        let state: Vec<Complex64> = (0..9).map(|i| Complex64::new(0.1 * i as f64, 0.3 - 0.05 * i as f64)).collect();
        let phases: Vec<f64> = (0..12).map(|i| 0.37 * i as f64).collect();
        let setup = QuantumSetup::from_raw(s, state, phases).unwrap();
        let table = probability_table(&setup).unwrap();
        for mask in [vec![1, 1], vec![1, 2], vec![2, 2], vec![0, 0]] {
            let m = ConjugationMask::new(mask, &s).unwrap();
            let a = quantum_correlation_tensor(&setup, &m).unwrap();
            let b = correlation_from_probabilities(&table, &m).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_and_normalization_are_checked() {
        let s = Scenario::new(1, 1, 2).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(QuantumSetup::new(s, vec![one, one], vec![0.0, 0.0]).is_err());
        assert!(QuantumSetup::new(s, vec![one, zero], vec![0.1, 0.0]).is_err());
        let fixed = QuantumSetup::from_raw(s, vec![one, one], vec![0.5, 1.0]).unwrap();
        assert_eq!(fixed.phases(), &[0.0, 0.5]);
    }

    #[test]
    fn document_round_trip() {
        let s = Scenario::new(2, 2, 2).unwrap();
        let setup = QuantumSetup::from_raw(
            s,
            vec![1.0.into(), 0.0.into(), 0.0.into(), 1.0.into()],
            vec![0.0, 0.1, 0.0, 0.2, 0.0, 0.3, 0.0, 0.4],
        )
        .unwrap();
        let json = serde_json::to_string(&setup).unwrap();
        let back: QuantumSetup = serde_json::from_str(&json).unwrap();
        assert_eq!(back.phases(), setup.phases());
        for (a, b) in back.state().iter().zip(setup.state()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
