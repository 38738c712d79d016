use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evodelay::cli;

/// Periodic solutions of delayed semilinear evolution systems by monotone
/// iteration from lower/upper solutions.
#[derive(Parser)]
#[command(name = "evodelay", version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run hypothesis checks, the monotone iteration and the certificate;
    /// write iterates.csv, convergence.csv and report.json.
    Solve { config: PathBuf },
    /// Run only the hypothesis refuters enabled in [checks].
    Check { config: PathBuf },
    /// Compute the contraction certificate only.
    Certify { config: PathBuf },
    /// Solve and compare against the configured oracle; exit 0 iff the max
    /// pointwise error is within the configured bound.
    Oracle { config: PathBuf },
    /// Mesh-refinement study over doubled grids.
    Sweep { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let code = match args.command {
        Command::Solve { config } => cli::run_solve(&config),
        Command::Check { config } => cli::run_check(&config),
        Command::Certify { config } => cli::run_certify(&config),
        Command::Oracle { config } => cli::run_oracle(&config),
        Command::Sweep { config } => cli::run_sweep(&config),
    };
    ExitCode::from(code as u8)
}
