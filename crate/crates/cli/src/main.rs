//! `speclab`: checks, spectra, dimensions and constructions from spec files.
//!
//! Exit codes: 0 pass, 1 check failed, 2 usage or parse error, 3 enumeration
//! cap or spectrum collision.

mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use speclab_core::exact_linalg::{parse_rat, Rat};
use speclab_core::hadamard::DEFAULT_TOL;
use speclab_core::{Error, DEFAULT_CAP};

#[derive(Parser, Debug)]
#[command(
    name = "speclab",
    version,
    about = "Finite-level certificates for infinite convolutions"
)]
pub struct Cli {
    /// Largest set the enumerations may build.
    #[arg(long, global = true, env = "SPECLAB_CAP", default_value_t = DEFAULT_CAP)]
    pub cap: u128,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether stage k is an admissible pair with its dual set.
    CheckPair {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Orthogonality and Parseval defect of the level-n tower spectrum.
    VerifySpectrum {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        /// Number of random frequencies in [0,1)^d.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Integer points, one per line, used instead of the tower spectrum.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimension log-ratios up to K with trailing-window min and max.
    Dims {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "K")]
        k_max: usize,
        #[arg(long, default_value_t = 100)]
        window: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bound for the tail transform on a grid in [-2/3,2/3]^d.
    Equipositivity {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long = "K")]
        k_max: usize,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the spec file of a family with prescribed dimensions.
    Construct {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_parser = rational)]
        alpha: Rat,
        #[arg(long, value_parser = rational)]
        beta: Rat,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact prefix of the non-closed infinite sum and its constraint checks.
    Counterexample {
        #[arg(long = "K")]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw points of the level-K truncated random series.
    Sample {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "K")]
        k_max: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Compact,
    Noncompact,
}

fn rational(s: &str) -> Result<Rat, String> {
    parse_rat(s).ok_or_else(|| format!("not a rational number: {s}"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::CapExceeded { .. } | Error::Collision { .. } => 3,
                Error::Parse { .. }
                | Error::DimensionMismatch { .. }
                | Error::PreconditionViolated(_)
                | Error::StageUnavailable(_)
                | Error::OutOfDomain(_)
                | Error::EmptySet => 2,
                _ => 1,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
