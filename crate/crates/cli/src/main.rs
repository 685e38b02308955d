//! `dfpep`: spectra, wavefunctions, thermodynamics and reference checks
//! for the deformed five-parameter exponential-type potential.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dfpep::model::{EtaBranch, RecastForm};
use dfpep::thermo::Bounds;

use commands::Overrides;
use config::RunConfig;
use output::OutDir;

const CONFIG_HELP: &str = "\
Config (JSON, unknown keys rejected; numbers may be strings such as \"1/12\"):
  potential   {p1, p2, p3, alpha, q = 1}
  scheme      {c0 = 1/12, omega = 0, lambda = 0} or {greene_aldrich: true}
  constants   {mu = 1, m = 1, hbar = 1, kb = 1}
  context     \"relativistic\" (default) | \"nonrelativistic\"
  states      [{n, l, d}, ...] or {n: [lo, hi], l: [lo, hi], d: [lo, hi]}; default []
  window      {lo, hi, grid = 200001}; default [-10 mu - 50, 10 mu + 50]
  wavefunction {r_max = auto (1e-8 decay), points = 2001, energy, reference_energy,
               branch = positive, exponent = generic | printed}
  thermo      {beta: {lo = 1e-3, hi = 1e2, per_decade = 20}, state = {n: 0, l: 0, d: 3},
               q1_mode = printed, branch_eta = plus, bounds = printed,
               figures: [{name, kind: z_beta | z_dimension | z_p2 | u_beta | f_beta | c_beta,
                          etas, beta, dimensions, p2}]}
  oracle      {r_max = max(6/alpha, 60), points = 20000, alpha_scan = []}

Exit codes: 0 success, 2 configuration error, 3 domain failure (partial output written).
DFPEP_THREADS caps worker threads.";

#[derive(Parser)]
#[command(name = "dfpep", version, about = "Bound states and thermodynamics of the deformed exponential-type potential", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energies per state: CSV (n, l, D, branch, E, residual, validity_flags) plus JSON.
    Spectrum(Args),
    /// Normalized radial curves (r, F, R), one CSV per state.
    Wavefunction(Args),
    /// Partition function, U, F and C curves, one CSV per configured figure.
    Thermo(Args),
    /// Compares the solver against the embedded reference table; config optional.
    ValidateTable1(Args),
    /// Closed-form energies against finite-difference eigenvalues.
    OracleCompare(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    branch_eta: Option<EtaArg>,
    #[arg(long, value_enum)]
    q1_mode: Option<Q1Arg>,
    #[arg(long, value_enum)]
    bounds: Option<BoundsArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EtaArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Q1Arg {
    Printed,
    Hbar2,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsArg {
    Printed,
    Shifted,
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides {
            branch_eta: self.branch_eta.map(|b| match b {
                EtaArg::Plus => EtaBranch::Plus,
                EtaArg::Minus => EtaBranch::Minus,
            }),
            q1_mode: self.q1_mode.map(|q| match q {
                Q1Arg::Printed => RecastForm::Printed,
                Q1Arg::Hbar2 => RecastForm::Hbar2,
            }),
            bounds: self.bounds.map(|b| match b {
                BoundsArg::Printed => Bounds::Printed,
                BoundsArg::Shifted => Bounds::Shifted,
            }),
        }
    }

    fn required_config(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let path = self.config.clone().ok_or_else(|| CliError::Config("--config is required".into()))?;
        Ok((RunConfig::load(&path)?, path))
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DFPEP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DFPEP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Io(e.into()))
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Spectrum(a) => {
            let (cfg, path) = a.required_config()?;
            commands::spectrum(&cfg, &mut OutDir::create(&a.out)?, &path)
        }
        Command::Wavefunction(a) => {
            let (cfg, path) = a.required_config()?;
            commands::wavefunction(&cfg, &mut OutDir::create(&a.out)?, &path)
        }
        Command::Thermo(a) => {
            let (cfg, path) = a.required_config()?;
            commands::thermo(&cfg, a.overrides(), &mut OutDir::create(&a.out)?, &path)
        }
        Command::ValidateTable1(a) => {
            let cfg = a.config.as_deref().map(RunConfig::load).transpose()?;
            commands::validate_table1(cfg.as_ref(), &mut OutDir::create(&a.out)?, a.config.as_deref())
        }
        Command::OracleCompare(a) => {
            let (cfg, path) = a.required_config()?;
            commands::oracle_compare(&cfg, &mut OutDir::create(&a.out)?, &path)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) if outcome.failures == 0 => ExitCode::SUCCESS,
        Ok(outcome) => {
            eprintln!("{} item(s) failed; partial results written", outcome.failures);
            ExitCode::from(3)
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
