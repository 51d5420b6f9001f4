//! Scenario scans with product exponent tables, and the exhaustive search
//! over symmetric tables in the two-party, three-setting, three-outcome case.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{maximize_with_bound, ratio, OptResult, OptimizationConfig};
use crate::bases::{build_functional, default_bases, DualOrder, GTable, Pairing};
use crate::error::Result;
use crate::functional::{BellFunctional, Form};
use crate::lhv::{classical_bound_with_budget, DEFAULT_BUDGET};
use crate::scenario::Scenario;

#[allow(clippy::approx_constant)]
/// Printed reference ratios `(N, k, d, R_Re, R_ABS)` for the product-table scan.
pub const REFERENCE_TABLE: [(usize, usize, usize, f64, f64); 22] = [
    (2, 2, 2, 1.41421, 1.41421),
    (2, 2, 3, 1.0, 1.0),
    (2, 2, 4, 1.03344, 1.0),
    (2, 2, 5, 1.40564, 1.44544),
    (2, 2, 6, 2.0, 1.71638),
    (2, 2, 7, 4.28896, 2.1611),
    (2, 2, 8, 4.05497, 2.54065),
    (2, 2, 9, 4.41147, 2.97816),
    (2, 2, 10, 4.76743, 3.42451),
    (2, 2, 11, 5.16095, 3.85207),
    (2, 2, 12, 5.78109, 4.35003),
    (2, 2, 13, 6.22541, 4.77022),
    (2, 2, 14, 6.84526, 5.31234),
    (3, 2, 2, 1.66667, 1.66667),
    (3, 2, 3, 1.0, 1.0),
    (3, 2, 4, 3.69497, 1.12111),
    (3, 2, 5, 3.78029, 1.93921),
    (4, 2, 2, 1.84277, 1.84277),
    (4, 2, 3, 1.0, 1.0),
    (4, 2, 4, 4.19176, 1.50835),
    (5, 2, 2, 1.97456, 1.97456),
    (5, 2, 3, 1.0, 1.79252),
];

/// Reference `(R_Re, R_ABS)` for a scenario, if it is in the table.
pub fn reference_ratios(scenario: &Scenario) -> Option<(f64, f64)> {
    REFERENCE_TABLE
        .iter()
        .find(|(n, k, d, _, _)| (*n, *k, *d) == (scenario.parties, scenario.settings, scenario.outcomes))
        .map(|&(_, _, _, re, abs)| (re, abs))
}

pub fn reference_scenarios() -> Vec<Scenario> {
    REFERENCE_TABLE
        .iter()
        .map(|&(n, k, d, _, _)| Scenario::new(n, k, d).expect("reference scenarios are valid"))
        .collect()
}

/// How the product table `g(h) = prod_p (h_p + offset) mod d` is mapped
/// onto basis vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableConvention {
    pub offset: usize,
    pub order: DualOrder,
    pub pairing: Pairing,
}

impl Default for TableConvention {
    fn default() -> Self {
        Self {
            offset: 1,
            order: DualOrder::Swapped,
            pairing: Pairing::Bilinear,
        }
    }
}

/// Product-table functional on `(N, 2, d)`; `d = 2` uses the Fourier basis.
pub fn product_g_functional(
    scenario: &Scenario,
    form: Form,
    convention: &TableConvention,
) -> Result<BellFunctional> {
    let bases = default_bases(scenario, convention.order)?;
    let g = GTable::product(scenario.parties, bases[0].count(), scenario.outcomes, convention.offset);
    Ok(build_functional(scenario, &bases, &g, form, convention.pairing)?.with_label("product"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormResult {
    pub classical_bound: f64,
    pub quantum_value: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub parties: usize,
    pub settings: usize,
    pub outcomes: usize,
    pub real_part: Option<FormResult>,
    pub modulus: Option<FormResult>,
    pub seed: u64,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            parties: self.parties,
            settings: self.settings,
            outcomes: self.outcomes,
        }
    }
}

fn scan_form(scenario: &Scenario, form: Form, convention: &TableConvention, config: &OptimizationConfig, budget: u64) -> Result<FormResult> {
    let f = product_g_functional(scenario, form, convention)?;
    let bound = classical_bound_with_budget(&f, budget)?.bound;
    let opt = maximize_with_bound(&f, bound, None, config)?;
    Ok(FormResult {
        classical_bound: bound,
        quantum_value: opt.value,
        ratio: ratio(opt.value, bound),
    })
}

/// One row per scenario; failures are recorded on the row and the scan goes on.
pub fn scan_product_g(
    scenarios: &[Scenario],
    forms: &[Form],
    convention: &TableConvention,
    config: &OptimizationConfig,
    budget: u64,
) -> Vec<ScanRow> {
    scenarios
        .iter()
        .map(|s| {
            let mut row = ScanRow {
                parties: s.parties,
                settings: s.settings,
                outcomes: s.outcomes,
                real_part: None,
                modulus: None,
                seed: config.seed,
                error: None,
            };
            for &form in forms {
                match scan_form(s, form, convention, config, budget) {
                    Ok(r) => match form {
                        Form::RealPart => row.real_part = Some(r),
                        Form::Modulus => row.modulus = Some(r),
                    },
                    Err(e) => {
                        row.error = Some(e.to_string());
                        break;
                    }
                }
            }
            row
        })
        .collect()
}

pub const CSV_HEADER: &str = "N,k,d,beta_re,value_re,R_re,beta_abs,value_abs,R_abs,seed,error";

/// CSV with [`CSV_HEADER`]; `fmt` renders every number.
pub fn rows_to_csv(rows: &[ScanRow], fmt: impl Fn(f64) -> String) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let cell = |v: Option<f64>| v.map(&fmt).unwrap_or_default();
    for r in rows {
        let mut fields = vec![r.parties.to_string(), r.settings.to_string(), r.outcomes.to_string()];
        for res in [&r.real_part, &r.modulus] {
            fields.push(cell(res.as_ref().map(|x| x.classical_bound)));
            fields.push(cell(res.as_ref().map(|x| x.quantum_value)));
            fields.push(cell(res.as_ref().and_then(|x| x.ratio)));
        }
        fields.push(r.seed.to_string());
        fields.push(r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTable {
    pub g: GTable,
    pub classical_bound: f64,
    pub quantum_value: f64,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSearch {
    pub best_g: GTable,
    pub best: OptResult,
    /// All tables by decreasing ratio.
    pub ranking: Vec<RankedTable>,
}

/// All `3^6` tables with `g(x, y) = g(y, x)` on `(2, 3, 3)`.
pub fn symmetric_tables() -> Vec<GTable> {
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    (0..729usize)
        .map(|code| {
            let mut digits = [0usize; 6];
            let mut c = code;
            for slot in digits.iter_mut().rev() {
                *slot = c % 3;
                c /= 3;
            }
            GTable::from_fn(2, 3, 3, |h| {
                let (a, b) = (h[0].min(h[1]), h[0].max(h[1]));
                digits[pairs.iter().position(|&p| p == (a, b)).expect("pair listed")] as i64
            })
        })
        .collect()
}

/// Optimizes every symmetric table with the Fourier basis and returns them
/// ranked; the winner is re-optimized with `final_config`.
pub fn symmetric_g_search(
    form: Form,
    pairing: Pairing,
    config: &OptimizationConfig,
    final_config: &OptimizationConfig,
) -> Result<SymmetricSearch> {
    let scenario = Scenario::new(2, 3, 3)?;
    let bases = default_bases(&scenario, DualOrder::Standard)?;
    let tables = symmetric_tables();
    let mut ranking: Vec<RankedTable> = tables
        .into_par_iter()
        .map(|g| -> Result<RankedTable> {
            let f = build_functional(&scenario, &bases, &g, form, pairing)?;
            let bound = classical_bound_with_budget(&f, DEFAULT_BUDGET)?.bound;
            let opt = maximize_with_bound(&f, bound, None, config)?;
            Ok(RankedTable {
                g,
                classical_bound: bound,
                quantum_value: opt.value,
                ratio: opt.ratio,
            })
        })
        .collect::<Result<_>>()?;
    // stable: equal ratios keep table order
    ranking.sort_by(|a, b| {
        let ra = a.ratio.unwrap_or(f64::NEG_INFINITY);
        let rb = b.ratio.unwrap_or(f64::NEG_INFINITY);
        rb.total_cmp(&ra)
    });
    let best_g = ranking[0].g.clone();
    let f = build_functional(&scenario, &bases, &best_g, form, pairing)?;
    let best = maximize_with_bound(&f, ranking[0].classical_bound, None, final_config)?;
    Ok(SymmetricSearch { best_g, best, ranking })
}
