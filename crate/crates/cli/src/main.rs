//! `renyikw` command-line driver.

mod commands;
mod io;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "renyikw", version, about = "Rényi entropies, Rényi QJSD correlations and entanglement of formation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// S_α of a state
    Entropy(Common),
    /// Q_α of an ensemble
    Qjsd(Common),
    /// C_α of a bipartite state, or of (A, E) for a tripartite pure state
    Calpha(Common),
    /// α-entanglement of formation
    Eof(Common),
    /// Quantum discord I − J
    Discord(Common),
    /// C_α(AE) against S_α(A) − E_f^α(AB) for a pure state on A ⊗ B ⊗ E
    KwVerify(Common),
    /// Minimum-error discrimination of an ensemble
    Discriminate(Common),
    /// Generalized robustness of a pure state, or the α = 1/2 roof check for a mixed one
    Robustness(Common),
    /// S_{1/2} against −log2 P_suc for an ensemble, or the single-copy capacity bound for a tripartite pure state
    PsucBound(Common),
    /// CSV table of one quantity over a grid of α values
    Sweep(SweepArgs),
    /// Seeded random state
    Random(RandomArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub measure_side: Option<MeasureSide>,
    #[arg(long)]
    pub outcomes: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    pub tol: f64,
    #[arg(long, env = "RENYIKW_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// start:stop:step with 0 < start ≤ stop < 1
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Haar-random pure instances of --dims seeded seed, seed+1, ... (ignored with --state)
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RandomArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Kind::Pure)]
    pub kind: Kind,
    /// Ginibre rank for mixed states; full rank when omitted
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasureSide {
    A,
    B,
    E,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    CAlpha,
    EofAlpha,
    Kw,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Pure,
    Mixed,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Usage(_) => 64,
        }
    }
}

impl From<renyikw_core::Error> for CliError {
    fn from(e: renyikw_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("\nFor more information, try '--help'.");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
