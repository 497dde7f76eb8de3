//! Command-line front end: experiment configs in, reproducible artifacts out.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "wavexp", version, about = "Truncated wavelet expansions of stationary Gaussian processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON); the bundled default when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; all outputs are independent of this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write the assembled joint covariance as CSV.
    #[arg(long, global = true)]
    pub dump_cov: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Wavelet, spectral and modulus conditions.
    Check,
    /// Constants ledger and elementary inequality checks.
    Constants,
    /// Exact mean-square error along the schedule.
    MseCurve,
    /// Monte Carlo sup-norm exceedance probabilities.
    SupProb,
    /// Modulus-of-continuity bound on random time pairs.
    Modulus,
    /// Expansion of a deterministic catalog function.
    ExpandDemo,
    /// Moment decay certificates.
    CertifyDecay,
    /// SVG charts from the CSV artifacts.
    Plot {
        /// Directory holding the CSVs; defaults to the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Check => "check",
            Self::Constants => "constants",
            Self::MseCurve => "mse-curve",
            Self::SupProb => "sup-prob",
            Self::Modulus => "modulus",
            Self::ExpandDemo => "expand-demo",
            Self::CertifyDecay => "certify-decay",
            Self::Plot { .. } => "plot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    /// A required condition failed before the main computation could start.
    #[error("condition failed: {0}")]
    Condition(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] wavexp_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const CONDITION_FAIL: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => exit::VALIDATION,
            Self::Condition(_) => exit::CONDITION_FAIL,
            Self::Numerical(_) => exit::NUMERICAL,
            Self::Io(_) => exit::IO,
        }
    }
}

/// Runs one invocation and returns its exit status; diagnostics go to stderr.
pub fn run(cli: &Cli) -> i32 {
    let result = match cli.threads {
        Some(0) => Err(CliError::Validation("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::dispatch(cli)),
            Err(e) => Err(CliError::Io(format!("cannot start worker pool: {e}"))),
        },
        None => commands::dispatch(cli),
    };
    match result {
        Ok(true) => exit::OK,
        Ok(false) => exit::CONDITION_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
