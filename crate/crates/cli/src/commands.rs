use std::path::Path;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};
use thiserror::Error;

use bellwork::bases::{ww_functional, SignFunction};
use bellwork::document::{self, FunctionalSpec};
use bellwork::functional::{BellFunctional, Form};
use bellwork::lhv::{classical_bound_with_budget, facet_check_with_budget};
use bellwork::optimize::{
    ghz_support, maximize_with_bound, reference_ratios, reference_scenarios,
    rows_to_csv, scan_product_g, OptimizationConfig, TableConvention,
};
use bellwork::scenario::Scenario;

use crate::manifest::{self, InputDigest, RunManifest};
use crate::output::{format_number, render_json, sha256_hex};
use crate::{Cli, Command, FunctionalArgs, OutputFormat, SearchArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] bellwork::Error),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use bellwork::Error as E;
        match self {
            CliError::Library(E::BudgetExceeded { .. }) => 3,
            CliError::Library(E::UnsupportedForm(_)) => 4,
            CliError::Library(E::InvalidSetup(_) | E::NotNormalized(_)) => 1,
            CliError::Library(_) | CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Replay(_) => 5,
        }
    }
}

pub struct RunOutput {
    pub document: String,
    inputs: Vec<InputDigest>,
    seed: Option<u64>,
    config: Value,
}

fn read(path: &Path) -> Result<(String, InputDigest), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((text, digest))
}

fn load_functional(args: &FunctionalArgs, inputs: &mut Vec<InputDigest>) -> Result<BellFunctional, CliError> {
    let spec: FunctionalSpec = match (&args.spec, &args.preset) {
        (Some(path), _) => {
            let (text, digest) = read(path)?;
            inputs.push(digest);
            document::parse_functional_spec(&text)?
        }
        (None, Some(name)) => document::preset(name)?,
        (None, None) => return Err(CliError::Usage("give --spec or --preset".into())),
    };
    Ok(spec.build_with_pairing(args.pairing.map(Into::into))?)
}

fn search_config(search: &SearchArgs) -> OptimizationConfig {
    OptimizationConfig {
        restarts: search.restarts,
        max_iter: search.max_iter,
        tolerance: search.tolerance,
        seed: search.seed,
        ..OptimizationConfig::default()
    }
}

fn functional_header(f: &BellFunctional) -> Value {
    json!({
        "label": f.provenance().label,
        "scenario": f.scenario(),
        "form": f.form(),
    })
}

/// Runs one command and, when asked, writes its manifest.
pub fn run(cli: &Cli, raw_args: &[String]) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let out = execute(cli)?;
    if let Some(path) = &cli.manifest {
        let m = RunManifest {
            command: manifest::strip_manifest_flag(raw_args),
            inputs: out.inputs.clone(),
            seed: out.seed,
            config: out.config.clone(),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            result_sha256: sha256_hex(out.document.as_bytes()),
        };
        manifest::write(path, &m).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<RunOutput, CliError> {
    let mut inputs = Vec::new();
    let mut seed = None;
    let mut config = Value::Null;
    let document = match &cli.command {
        Command::Bound { functional } => {
            let f = load_functional(functional, &mut inputs)?;
            config = json!({"budget": functional.budget});
            let r = classical_bound_with_budget(&f, functional.budget)?;
            log::info!("enumerated {} strategies", r.examined);
            render_json(json!({
                "functional": functional_header(&f),
                "classical_bound": r.bound,
                "witness": r.witness().assignment(),
                "argmax_count": r.argmax.len(),
                "examined": r.examined.to_string(),
            }))
        }
        Command::Optimize {
            functional,
            search,
            ghz_family,
        } => {
            let f = load_functional(functional, &mut inputs)?;
            let cfg = search_config(search);
            seed = Some(cfg.seed);
            config = json!({"optimization": cfg, "budget": functional.budget, "ghz_family": ghz_family});
            let bound = classical_bound_with_budget(&f, functional.budget)?.bound;
            let support = if *ghz_family {
                let s = f.scenario();
                if s.parties != 3 || s.outcomes != 3 {
                    return Err(bellwork::Error::WrongScenario(format!(
                        "--ghz-family needs three parties with three outcomes, got {s}"
                    ))
                    .into());
                }
                Some(ghz_support(s.parties, s.outcomes))
            } else {
                None
            };
            let r = maximize_with_bound(&f, bound, support, &cfg)?;
            let note = r
                .ratio
                .is_none()
                .then_some("the classical bound vanishes, so the ratio is undefined");
            render_json(json!({
                "functional": functional_header(&f),
                "config": cfg,
                "classical_bound": r.classical_bound,
                "quantum_value": r.value,
                "ratio": r.ratio,
                "note": note,
                "best_restart": r.best_restart,
                "iterations": r.iterations,
                "histogram": r.histogram,
                "setup": r.setup,
            }))
        }
        Command::Evaluate { functional, setup } => {
            let f = load_functional(functional, &mut inputs)?;
            let (text, digest) = read(setup)?;
            inputs.push(digest);
            let s = document::parse_setup(&text)?;
            let value = f.value_on(&s)?;
            let bound = classical_bound_with_budget(&f, functional.budget)?.bound;
            render_json(json!({
                "functional": functional_header(&f),
                "quantum_value": value,
                "classical_bound": bound,
                "ratio": bellwork::optimize::ratio(value, bound),
            }))
        }
        Command::Table {
            scenarios,
            search,
            budget,
            format,
        } => {
            let list = match scenarios {
                Some(text) => parse_scenarios(text)?,
                None => reference_scenarios(),
            };
            let cfg = search_config(search);
            seed = Some(cfg.seed);
            let convention = TableConvention::default();
            config = json!({"optimization": cfg, "budget": budget, "convention": convention});
            let rows = scan_product_g(&list, &[Form::RealPart, Form::Modulus], &convention, &cfg, *budget);
            for r in &rows {
                if let Some(e) = &r.error {
                    log::warn!("row {}: {e}", r.scenario());
                }
            }
            match format {
                OutputFormat::Csv => rows_to_csv(&rows, format_number),
                OutputFormat::Json => {
                    let annotated: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            let mut v = serde_json::to_value(r).expect("rows serialize");
                            if let Some((re, abs)) = reference_ratios(&r.scenario()) {
                                v["reference"] = json!({"ratio_re": re, "ratio_abs": abs});
                            }
                            v
                        })
                        .collect();
                    render_json(json!({"convention": convention, "rows": annotated}))
                }
            }
        }
        Command::Facet { functional } => {
            let f = load_functional(functional, &mut inputs)?;
            config = json!({"budget": functional.budget});
            let r = facet_check_with_budget(&f, None, functional.budget)?;
            render_json(json!({
                "functional": functional_header(&f),
                "report": r,
            }))
        }
        Command::Ww { parties } => {
            if *parties == 0 || *parties > 4 {
                return Err(CliError::Usage(format!(
                    "--parties must be between 1 and 4, got {parties}"
                )));
            }
            config = json!({"parties": parties});
            ww_document(*parties)?
        }
        Command::Replay { path } => return replay(path),
    };
    Ok(RunOutput {
        document,
        inputs,
        seed,
        config,
    })
}

/// `N,k,d` triples separated by semicolons; an empty string is an empty list.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>, CliError> {
    text.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<usize> = t
                .split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Usage(format!("bad scenario `{t}`: {e}")))?;
            match parts.as_slice() {
                [n, k, d] => Ok(Scenario::new(*n, *k, *d)?),
                _ => Err(CliError::Usage(format!("scenario `{t}` needs three numbers"))),
            }
        })
        .collect()
}

fn ww_document(parties: usize) -> Result<String, CliError> {
    let mut entries = Vec::new();
    let mut non_factorizable = 0;
    for f in SignFunction::all(parties) {
        let functional = ww_functional(&f)?;
        let bound = classical_bound_with_budget(&functional, bellwork::lhv::DEFAULT_BUDGET)?.bound;
        let factorizes = f.factorizes();
        if !factorizes {
            non_factorizable += 1;
        }
        entries.push(json!({
            "signs": f.signs(),
            "factorizes": factorizes,
            "coefficients": bellwork::bases::ww_coefficients(&f),
            "classical_bound": bound,
        }));
    }
    Ok(render_json(json!({
        "parties": parties,
        "count": entries.len(),
        "non_factorizable": non_factorizable,
        "functionals": entries,
    })))
}

fn replay(path: &Path) -> Result<RunOutput, CliError> {
    let (text, digest) = read(path)?;
    let m: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not a manifest: {e}", path.display())))?;
    for input in &m.inputs {
        let (_, now) = read(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Replay(format!("input {} changed since the run", input.path)));
        }
    }
    let mut argv = vec!["bellwork".to_string()];
    argv.extend(m.command.iter().cloned());
    let inner = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(inner.command, Command::Replay { .. }) {
        return Err(CliError::Usage("a manifest cannot record a replay".into()));
    }
    let out = execute(&inner)?;
    let got = sha256_hex(out.document.as_bytes());
    if got != m.result_sha256 {
        return Err(CliError::Replay(format!(
            "result digest {got} differs from recorded {}",
            m.result_sha256
        )));
    }
    log::info!("replay of {} matches", path.display());
    Ok(RunOutput {
        document: out.document,
        inputs: vec![digest],
        seed: m.seed,
        config: m.config,
    })
}
