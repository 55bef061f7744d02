use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use covmetric_cli::commands::{
    cmd_approx, cmd_convergence, cmd_delta, cmd_simulate, cmd_spectral, ApproxArgs, ConvergenceArgs, DeltaArgs,
    SimulateArgs, SpectralArgs,
};
use covmetric_cli::report::Outcome;
use covmetric_cli::reproduce::{cmd_reproduce, ReproduceArgs};
use covmetric_cli::{error::Result, Status};

#[derive(Debug, Parser)]
#[command(name = "covmetric", version, about = "Trace-minimization distances between covariance matrices and spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distance δ (or δ_T with --toeplitz) between two covariance matrices.
    Delta(DeltaArgs),
    /// Structured approximant of a covariance estimate.
    Approx(ApproxArgs),
    /// L1 distance, normalized ratios or autocorrelations of spectral measures.
    Spectral(SpectralArgs),
    /// δ_T of growing Toeplitz sections against the L1 distance of the spectra.
    Convergence(ConvergenceArgs),
    /// Simulate a moving-average series and its sample covariance.
    Simulate(SimulateArgs),
    /// Re-run the worked examples and report pass/fail per check.
    #[command(visible_alias = "paper")]
    Reproduce(ReproduceArgs),
}

fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Delta(a) => cmd_delta(a),
        Command::Approx(a) => cmd_approx(a),
        Command::Spectral(a) => cmd_spectral(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let started = Instant::now();
    let status = match run(&cli.command) {
        Ok(mut outcome) => {
            outcome.report.wall_time = started.elapsed().as_secs_f64();
            match outcome.report.emit(outcome.out.as_deref()) {
                Ok(()) => outcome.status,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.status()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.status()
        }
    };
    if status == Status::NotConverged {
        eprintln!("error: solver stopped at the iteration cap; see the report's solver section");
    }
    status.into()
}
