//! The quantum value of a functional as a smooth function of the state and
//! the free phases, with its analytic gradient.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::Result;
use crate::functional::{BellFunctional, Form};
use crate::multiport::QuantumSetup;
use crate::scenario::Scenario;

struct Term {
    coefficient: Complex64,
    shift: usize,
}

struct SettingGroup {
    digits: Vec<usize>,
    terms: Vec<Term>,
}

struct Shift {
    exponents: Vec<usize>,
    forward: Vec<usize>,
    backward: Vec<usize>,
}

/// Parameters are `[Re y | Im y | free phases]`, with `y` the unnormalized
/// amplitudes on the support and phases on ports `1..d` of every
/// (party, setting) row.
pub struct Objective {
    scenario: Scenario,
    form: Form,
    support: Vec<usize>,
    groups: Vec<SettingGroup>,
    shifts: Vec<Shift>,
    mode_digits: Vec<usize>,
}

struct Workspace {
    y: Vec<Complex64>,
    phases: Vec<f64>,
    /// Phase-shifted states, one per setting group.
    t: Vec<Vec<Complex64>>,
    e: Vec<Vec<Complex64>>,
}

impl Objective {
    pub fn new(functional: &BellFunctional, support: Option<Vec<usize>>) -> Self {
        let scenario = *functional.scenario();
        let n = scenario.num_outcome_tuples();
        let radix = scenario.outcome_radix();
        let d = scenario.outcomes;
        let mut shifts: Vec<Shift> = Vec::new();
        let mut groups: Vec<SettingGroup> = scenario
            .settings_radix()
            .tuples()
            .map(|digits| SettingGroup {
                digits,
                terms: Vec::new(),
            })
            .collect();
        for comp in functional.components() {
            let r = comp.mask.exponents().to_vec();
            let shift = match shifts.iter().position(|s| s.exponents == r) {
                Some(i) => i,
                None => {
                    let mut forward = vec![0; n];
                    let mut backward = vec![0; n];
                    for (ji, slot) in forward.iter_mut().enumerate() {
                        let j = radix.digits(ji);
                        let up: Vec<usize> = j.iter().zip(&r).map(|(a, b)| (a + b) % d).collect();
                        *slot = radix.index(&up);
                        backward[*slot] = ji;
                    }
                    shifts.push(Shift {
                        exponents: r,
                        forward,
                        backward,
                    });
                    shifts.len() - 1
                }
            };
            for (xi, c) in comp.coefficients.iter().enumerate() {
                if *c != Complex64::new(0.0, 0.0) {
                    groups[xi].terms.push(Term {
                        coefficient: *c,
                        shift,
                    });
                }
            }
        }
        groups.retain(|g| !g.terms.is_empty());
        Self {
            scenario,
            form: functional.form(),
            support: support.unwrap_or_else(|| (0..n).collect()),
            groups,
            shifts,
            mode_digits: radix.digit_table(),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    fn phase_rows(&self) -> usize {
        self.scenario.parties * self.scenario.settings
    }

    pub fn dimension(&self) -> usize {
        2 * self.support.len() + self.phase_rows() * (self.scenario.outcomes - 1)
    }

    /// Number of leading amplitude parameters.
    pub fn amplitude_dimension(&self) -> usize {
        2 * self.support.len()
    }

    fn unpack(&self, params: &[f64]) -> (Vec<Complex64>, Vec<f64>) {
        let m = self.support.len();
        let mut y = vec![Complex64::new(0.0, 0.0); self.scenario.num_outcome_tuples()];
        for (i, &j) in self.support.iter().enumerate() {
            y[j] = Complex64::new(params[i], params[m + i]);
        }
        (y, self.full_phases(&params[2 * m..]))
    }

    fn full_phases(&self, free: &[f64]) -> Vec<f64> {
        let d = self.scenario.outcomes;
        let mut phases = vec![0.0; self.phase_rows() * d];
        for (row, chunk) in free.chunks(d - 1).enumerate() {
            phases[row * d + 1..row * d + d].copy_from_slice(chunk);
        }
        phases
    }

    fn prepare(&self, y: Vec<Complex64>, phases: Vec<f64>) -> Workspace {
        let n = y.len();
        let (k, d, parties) = (self.scenario.settings, self.scenario.outcomes, self.scenario.parties);
        let mut t = Vec::with_capacity(self.groups.len());
        let mut e = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let mut tg = vec![Complex64::new(0.0, 0.0); n];
            let mut eg = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                let digits = &self.mode_digits[j * parties..(j + 1) * parties];
                let phi: f64 = (0..parties)
                    .map(|p| phases[(p * k + g.digits[p]) * d + digits[p]])
                    .sum();
                eg[j] = Complex64::from_polar(1.0, phi);
                tg[j] = eg[j] * y[j];
            }
            t.push(tg);
            e.push(eg);
        }
        Workspace { y, phases, t, e }
    }

    fn raw_sum(&self, ws: &Workspace) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (g, t) in self.groups.iter().zip(&ws.t) {
            for term in &g.terms {
                let fwd = &self.shifts[term.shift].forward;
                let s: Complex64 = t.iter().zip(fwd).map(|(tj, &u)| tj * t[u].conj()).sum();
                z += term.coefficient * s;
            }
        }
        z
    }

    fn reading(&self, raw: Complex64) -> (f64, Complex64) {
        match self.form {
            Form::RealPart => (raw.re, Complex64::new(1.0, 0.0)),
            Form::Modulus => {
                let norm = raw.norm();
                if norm > 0.0 {
                    (norm, raw / norm)
                } else {
                    (0.0, Complex64::new(1.0, 0.0))
                }
            }
        }
    }

    /// Value at `params`; writes `d value / d params` into `grad`.
    pub fn value_and_gradient(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let (y, phases) = self.unpack(params);
        let norm2: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 1e-300 {
            grad.iter_mut().for_each(|g| *g = 0.0);
            return 0.0;
        }
        let ws = self.prepare(y, phases);
        let (value, zeta) = self.reading(self.raw_sum(&ws) / norm2);
        let zeta_bar = zeta.conj();

        let n = ws.y.len();
        let (k, d, parties) = (self.scenario.settings, self.scenario.outcomes, self.scenario.parties);
        let mut big_g = vec![Complex64::new(0.0, 0.0); n];
        let mut phase_grad = vec![0.0; ws.phases.len()];
        for ((g, t), e) in self.groups.iter().zip(&ws.t).zip(&ws.e) {
            for term in &g.terms {
                let shift = &self.shifts[term.shift];
                let c = term.coefficient;
                let a = zeta_bar * c;
                let b = zeta * c.conj();
                for j in 0..n {
                    let u = shift.forward[j];
                    big_g[j] += e[j].conj() * (a * t[shift.backward[j]] + b * t[u]);
                    let q = (a * t[j] * t[u].conj()).im;
                    if q == 0.0 {
                        continue;
                    }
                    let digits = &self.mode_digits[j * parties..(j + 1) * parties];
                    for p in 0..parties {
                        let row = (p * k + g.digits[p]) * d;
                        phase_grad[row + digits[p]] -= q;
                        phase_grad[row + (digits[p] + shift.exponents[p]) % d] += q;
                    }
                }
            }
        }
        let m = self.support.len();
        for (i, &j) in self.support.iter().enumerate() {
            let gj = (big_g[j] - ws.y[j] * (2.0 * value)) / norm2;
            grad[i] = gj.re;
            grad[m + i] = gj.im;
        }
        for row in 0..self.phase_rows() {
            for port in 1..d {
                grad[2 * m + row * (d - 1) + port - 1] = phase_grad[row * d + port] / norm2;
            }
        }
        value
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let mut grad = vec![0.0; params.len()];
        self.value_and_gradient(params, &mut grad)
    }

    /// `Herm(conj(zeta) B)` on the support, for the current phases.
    fn hermitian_form(&self, phases: &[f64], zeta: Complex64) -> DMatrix<Complex64> {
        let n = self.scenario.num_outcome_tuples();
        let ws = self.prepare(vec![Complex64::new(1.0, 0.0); n], phases.to_vec());
        let mut position = vec![usize::MAX; n];
        for (i, &j) in self.support.iter().enumerate() {
            position[j] = i;
        }
        let m = self.support.len();
        let mut h = DMatrix::<Complex64>::zeros(m, m);
        for (g, e) in self.groups.iter().zip(&ws.e) {
            for term in &g.terms {
                let fwd = &self.shifts[term.shift].forward;
                for (col, &j) in self.support.iter().enumerate() {
                    let u = fwd[j];
                    let row = position[u];
                    if row == usize::MAX {
                        continue;
                    }
                    // B[u][j] = c e^(i phi(j)) e^(-i phi(u))
                    let entry = zeta.conj() * term.coefficient * e[j] * e[u].conj() * 0.5;
                    h[(row, col)] += entry;
                    h[(col, row)] += entry.conj();
                }
            }
        }
        h
    }

    /// Replaces the amplitudes by the best state for the current phases.
    pub fn polish_state(&self, params: &mut [f64]) {
        let m = self.support.len();
        let phases = self.full_phases(&params[2 * m..]);
        let (y, _) = self.unpack(params);
        let norm2: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let mut zeta = if norm2 > 0.0 {
            let ws = self.prepare(y, phases.clone());
            self.reading(self.raw_sum(&ws) / norm2).1
        } else {
            Complex64::new(1.0, 0.0)
        };
        let rounds = if self.form == Form::Modulus { 2 } else { 1 };
        for _ in 0..rounds {
            let eig = SymmetricEigen::new(self.hermitian_form(&phases, zeta));
            let top = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if *v > eig.eigenvalues[best] { i } else { best });
            let candidate: Vec<f64> = {
                let v = eig.eigenvectors.column(top);
                let mut out = params.to_vec();
                for i in 0..m {
                    out[i] = v[i].re;
                    out[m + i] = v[i].im;
                }
                out
            };
            if self.value(&candidate) >= self.value(params) {
                params.copy_from_slice(&candidate);
            }
            let (y, _) = self.unpack(params);
            let ws = self.prepare(y, phases.clone());
            zeta = self.reading(self.raw_sum(&ws)).1;
        }
    }

    pub fn to_setup(&self, params: &[f64]) -> Result<QuantumSetup> {
        let (y, phases) = self.unpack(params);
        QuantumSetup::from_raw(self.scenario, y, phases)
    }
}
