//! Command-line front end for `xxchain-core`: spectra, metric operators,
//! perturbative tables and the verification suites.

pub mod angle;
pub mod commands;
pub mod json;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xxchain_core::chain::Limits;
use xxchain_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_EXCEPTIONAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Io(std::io::Error),
    VerifyFailed(usize),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{}", e),
            CliError::Usage(s) => write!(f, "{}", s),
            CliError::Io(e) => write!(f, "io error: {}", e),
            CliError::VerifyFailed(n) => write!(f, "{} verification check(s) failed", n),
        }
    }
}

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::VerifyFailed(_) => EXIT_VERIFY,
        CliError::Usage(_) | CliError::Io(_) => EXIT_VALIDATION,
        CliError::Core(e) => match e {
            Error::Resource { .. } => EXIT_RESOURCE,
            Error::ExceptionalPoint(_) | Error::JordanBlockSuspected { .. } | Error::ZeroNorm { .. } => EXIT_EXCEPTIONAL,
            _ => EXIT_VALIDATION,
        },
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "xxchain", version, about = "XX chain with complex boundary fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bethe roots, single-particle energies and dense eigenvalues
    Spectrum(SpectrumArgs),
    /// eta, the Hermitian counterpart h and C = P eta
    Metric(MetricArgs),
    /// Perturbative series tables
    Perturb(PerturbArgs),
    /// Run a verification suite
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    H,
    Hg,
    Hprime,
    Truncated,
    Periodic,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Override the command's main tolerance
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub sites: usize,
    #[arg(long, default_value_t = 0.0)]
    pub g: f64,
    /// Boundary phase, radians or multiples of pi ("0.5pi", "pi/3")
    #[arg(long, default_value = "0.5pi", value_parser = angle::parse_angle)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Hg)]
    pub variant: VariantArg,
    /// Restrict to the sector with this many up spins
    #[arg(long)]
    pub sector: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Scan chain lengths from --sites up to this value
    #[arg(long)]
    pub max_sites: Option<usize>,
    /// Add dense many-body eigenvalues (all sectors unless --sector is given)
    #[arg(long)]
    pub dense: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Build the metric even for roots off the unit circle
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Lambdas,
    ATerms,
    HTerms,
    PTable,
    Kappa,
    Cross,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    #[arg(long, default_value_t = 8)]
    pub sites: usize,
    /// Series order; for p-table the number of powers of g^2
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value = "0.5pi", value_parser = angle::parse_angle)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = Emit::Lambdas)]
    pub emit: Emit,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tamper {
    EtaTranspose,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value_t = Suite::Fast)]
    pub suite: Suite,
    /// Upper bound for chain lengths in the suite
    #[arg(long)]
    pub max_sites: Option<usize>,
    /// Negative control: corrupt an intermediate result
    #[arg(long, value_enum, hide = true)]
    pub tamper: Option<Tamper>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Dense cap, overridable through XXCHAIN_MAX_DIM.
pub fn limits_from_env() -> CliResult<Limits> {
    match std::env::var("XXCHAIN_MAX_DIM") {
        Ok(v) => {
            let max_dim = v.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("XXCHAIN_MAX_DIM={:?} is not a positive integer", v)))?;
            if max_dim == 0 {
                return Err(CliError::Usage("XXCHAIN_MAX_DIM must be positive".into()));
            }
            Ok(Limits { max_dim })
        }
        Err(_) => Ok(Limits::default()),
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let limits = limits_from_env()?;
    match cli.command {
        Command::Spectrum(a) => commands::cmd_spectrum(&a, &limits),
        Command::Metric(a) => commands::cmd_metric(&a, &limits),
        Command::Perturb(a) => commands::cmd_perturb(&a, &limits),
        Command::Verify(a) => verify::cmd_verify(&a, &limits),
    }
}
