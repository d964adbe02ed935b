//! `fewbody`: batch experiments over the two-body and three-body pipelines.
//!
//! Every subcommand writes CSV tables plus `manifest.json` into the output
//! directory. Exit status: 0 success, 2 invalid input, 3 numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fewbody::core::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "fewbody", version, about = "Virtual levels and three-body bound-state counting")]
pub struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config `output_dir`, else `out/<experiment>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for z-sweeps and assembly.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Space dimension (overrides the config).
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(3..=5))]
    pub d: Option<u8>,
    /// Seed for the variational basis (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Coupling at which the pair first binds, with refinement and shooting checks.
    CriticalCoupling,
    /// Zero-energy solution at criticality: profile, tail law, classification.
    Resonance,
    /// τ from the first-order kernel and from the w(z) fit (d = 4).
    Tau {
        /// Use ψ(1) = -1 instead of -γ.
        #[arg(long)]
        literal_psi: bool,
    },
    /// 1 - μ_max(BS(z)) over the z-schedule with the singularity fit.
    BsScan,
    /// Spectral gap on the complement of the zero-energy solution.
    Gap,
    /// Jacobi coefficient table and identity residuals.
    JacobiCheck,
    /// n(1, A(z)) at every schedule energy.
    FaddeevCount,
    /// Counting curve at critical coupling with the growth or plateau fit.
    EfimovScan,
    /// Variational count against n(1, A(z)).
    OracleCount,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CriticalCoupling => "critical-coupling",
            Command::Resonance => "resonance",
            Command::Tau { .. } => "tau",
            Command::BsScan => "bs-scan",
            Command::Gap => "gap",
            Command::JacobiCheck => "jacobi-check",
            Command::FaddeevCount => "faddeev-count",
            Command::EfimovScan => "efimov-scan",
            Command::OracleCount => "oracle-count",
        }
    }
}

/// Failure with its exit status.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<fewbody::Error> for Failure {
    fn from(e: fewbody::Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    match &cli.config {
        Some(p) => Ok(RunConfig::from_path(p)?),
        None => Ok(RunConfig::parse(&format!("experiment = \"{}\"", cli.command.name()))?),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Invalid("--workers must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Numerical(format!("thread pool: {e}")))?;
    }
    let cfg = load_config(cli)?;
    commands::dispatch(cli, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
