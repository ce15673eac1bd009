//! Batch front end for the effact library.
//!
//! `effact <eval|tracelog|reparam|evolve|validate> --config <path>`
//! with optional `--out`, `--hbar` and `--grid-n` overrides. CSV output is
//! deterministic: identical configs produce byte-identical files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "effact", version, about = "One-loop effective-action toolkit for coordinate-dependent-mass models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Model/run definition file (see configs/ for the format).
    #[arg(long)]
    config: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override model.hbar from the config.
    #[arg(long)]
    hbar: Option<f64>,
    /// Override grid.points from the config.
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep x and tabulate the classical and one-loop coefficients.
    Eval(RunArgs),
    /// Compare the exact trace-log against the gradient expansion on bumps.
    Tracelog(RunArgs),
    /// Run the covariance checks under the configured coordinate map.
    Reparam(RunArgs),
    /// Integrate the classical and quantum-corrected orbits.
    Evolve(RunArgs),
    /// Sweep the mass positivity and frequency sign over the domain.
    Validate(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&RunConfig, &effact::ModelSpec) -> Result<Outcome, CliError>) =
        match &cli.command {
            Command::Eval(a) => (a, commands::cmd_eval),
            Command::Tracelog(a) => (a, commands::cmd_tracelog),
            Command::Reparam(a) => (a, commands::cmd_reparam),
            Command::Evolve(a) => (a, commands::cmd_evolve),
            Command::Validate(a) => (a, commands::cmd_validate),
        };
    match execute(args, run) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(
    args: &RunArgs,
    run: fn(&RunConfig, &effact::ModelSpec) -> Result<Outcome, CliError>,
) -> Result<ExitCode, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(n) = args.grid_n {
        if n < 16 {
            return Err(CliError::Config(format!("--grid-n {n}: need at least 16 points")));
        }
        config.grid.points = n;
    }
    let spec = config.build_spec(args.hbar)?;

    let outcome = run(&config, &spec)?;
    if let Some(csv) = &outcome.csv {
        match &args.out {
            Some(path) => std::fs::write(path, csv)?,
            None => print!("{csv}"),
        }
    }
    // keep stdout clean for CSV when no --out is given
    if outcome.csv.is_some() && args.out.is_none() {
        eprintln!("{}", outcome.summary);
    } else {
        println!("{}", outcome.summary);
    }
    match outcome.failure {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(e.exit_code() as u8))
        }
    }
}
