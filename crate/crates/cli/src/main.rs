mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "bellwork", version, about = "Bell functionals, classical bounds and multiport violations")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write a reproduction manifest to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairingArg {
    Bilinear,
    Sesquilinear,
}

impl From<PairingArg> for bellwork::bases::Pairing {
    fn from(p: PairingArg) -> Self {
        match p {
            PairingArg::Bilinear => Self::Bilinear,
            PairingArg::Sesquilinear => Self::Sesquilinear,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FunctionalArgs {
    /// Functional document (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,

    /// Built-in functional: chsh, cglmp-223, cglmp-corr-223, i323,
    /// tight-323-g1, tight-323-g2, tight-323-g3, trivial-223.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// Override the pairing of basis-built functionals.
    #[arg(long, value_enum)]
    pub pairing: Option<PairingArg>,

    /// Maximum number of deterministic strategies to enumerate.
    #[arg(long, default_value_t = bellwork::lhv::DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 200)]
    pub restarts: usize,

    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,

    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact classical bound by enumeration.
    Bound {
        #[command(flatten)]
        functional: FunctionalArgs,
    },
    /// Maximize the quantum value over multiport setups.
    Optimize {
        #[command(flatten)]
        functional: FunctionalArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Restrict the state to a|000> + b|111> + c|222>.
        #[arg(long)]
        ghz_family: bool,
    },
    /// Evaluate a functional on a given setup document.
    Evaluate {
        #[command(flatten)]
        functional: FunctionalArgs,
        /// Setup document (JSON).
        #[arg(long, value_name = "FILE")]
        setup: PathBuf,
    },
    /// Product-table scan over (N,2,d) scenarios.
    Table {
        /// Semicolon-separated `N,k,d` triples; defaults to the 22 reference rows.
        #[arg(long)]
        scenarios: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = bellwork::lhv::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Facet certificate of a real-part functional.
    Facet {
        #[command(flatten)]
        functional: FunctionalArgs,
    },
    /// Enumerate the dichotomic two-setting family for N parties.
    Ww {
        #[arg(long)]
        parties: usize,
    },
    /// Re-run the command recorded in a manifest and check the result digest.
    Replay {
        #[arg(value_name = "MANIFEST")]
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::run(&cli, &args[1..]) {
        Ok(out) => {
            print!("{}", out.document);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
