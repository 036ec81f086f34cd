mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use levcap::solver::Knob;

use config::RunConfig;

/// Optimal bankruptcy level and capital structure under a jump diffusion.
#[derive(Debug, Parser)]
#[command(name = "levcap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true, env = "LEVCAP_CONFIG")]
    config: Option<PathBuf>,

    /// Write the tabular output to this CSV file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo seed, overriding `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Face value of debt, overriding `debt.P`.
    #[arg(long = "P", global = true)]
    face_value: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal bankruptcy level and the values at v0.
    Solve,
    /// Equity, debt and firm values over asset levels for several barriers.
    Value,
    /// Face value maximising the firm value at v0.
    TwoStage,
    /// Sweep a cost or tax shape parameter.
    Sweep {
        #[arg(long, value_enum)]
        knob: KnobArg,
        /// `lo:hi:steps`
        #[arg(long)]
        range: String,
        #[arg(long, value_enum, default_value = "fixed_P")]
        mode: ModeArg,
    },
    /// Compare closed forms with Monte Carlo estimates.
    Validate {
        /// Shift a closed-form value before comparison, `NAME=DELTA`.
        #[arg(long, hide = true)]
        perturb: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KnobArg {
    A,
    C,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "fixed_P")]
    FixedP,
    #[value(name = "two_stage")]
    TwoStage,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] levcap::Error),
    #[error("validation failed for: {}", .0.join(", "))]
    Validation(Vec<String>),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("LEVCAP_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("LEVCAP_THREADS={text}: expected a non-negative integer")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("LEVCAP_THREADS: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("no configuration: pass --config or set LEVCAP_CONFIG".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(p) = cli.face_value {
        cfg.debt.face_value = p;
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Solve => commands::solve(&cfg, out),
        Command::Value => commands::value(&cfg, out),
        Command::TwoStage => commands::two_stage(&cfg, out),
        Command::Sweep { knob, range, mode } => {
            let values = commands::parse_range(&range)?;
            let knob = match knob {
                KnobArg::A => Knob::CostConcavity,
                KnobArg::C => Knob::TaxConvexity,
            };
            commands::sweep(&cfg, knob, &values, matches!(mode, ModeArg::TwoStage), out)
        }
        Command::Validate { perturb } => {
            let shifts = commands::parse_perturbations(&perturb)?;
            commands::validate(&cfg, &shifts, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("levcap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
