//! `lpp-lab`: exact and asymptotic distribution of last passage times with
//! geometric weights, from the command line.

mod commands;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LPP_LAB_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lpp-lab", version, about = "Last passage percolation: sampling, exact law, contours, asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo samples of G(M, N)
    Sample(SampleArgs),
    /// Exact law of G(M, N) from Toeplitz determinants
    Exact(ExactArgs),
    /// Trace the contours Gamma_1 and Gamma_2 for one endpoint
    Contours(ContourArgs),
    /// Run a validation suite and print a pass/fail table
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (or directory for `contours`); defaults to $LPP_LAB_OUT_DIR or the working directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
    /// Largest level n to report
    #[arg(long)]
    pub nmax: usize,
    /// Truncation tolerance for the ratio sequence
    #[arg(long, default_value_t = lpp_lab::toeplitz::DEFAULT_TRUNCATION_EPS)]
    pub eps: f64,
    /// Compare against the brute-force lattice oracle (small sizes only)
    #[arg(long)]
    pub check_oracle: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub a: f64,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Tails,
    Rhp,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub x: Option<f64>,
    /// Also write the report to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => commands::sample(&a),
        Command::Exact(a) => commands::exact(&a),
        Command::Contours(a) => commands::contours(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    /// 1 for failed checks and I/O, 2 for invalid input, 3 for resource guards.
    pub fn exit_code(&self) -> u8 {
        use lpp_lab::Error as E;
        match self {
            CliError::Lib(E::Domain(_)) | CliError::Lib(E::NoRoot { .. }) | CliError::Invalid(_) => 2,
            CliError::Lib(E::Guard(_)) => 3,
            _ => 1,
        }
    }
}
