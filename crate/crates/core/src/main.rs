use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use glauber::experiments::{self, Experiment, Overrides};
use glauber::Error;

#[derive(Parser)]
#[command(
    name = "glauber",
    version,
    about = "Spectral gaps of birth-and-death dynamics for Gibbs point processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fourier, regularity, stability and growth checks on the potential.
    CheckPotential(Common),
    /// Exact-enumeration residuals of the lattice identities.
    VerifyIdentities(Common),
    /// Exact lattice gap against the kernel certificate and the high-temperature bound.
    Gap(Common),
    /// Simulate the dynamics and write event logs and particle-count series.
    Simulate(Common),
    /// Estimate the gap from simulated autocorrelations.
    EstimateGap(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces every residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn print<T: Serialize>(v: &T) {
    match serde_json::to_string_pretty(v) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("error: {e}"),
    }
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::Json(_) | Error::Csv { .. } | Error::InvalidParameter(_) => {
            ExitCode::from(2)
        }
        Error::StateSpaceOverflow { .. } => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn run(cmd: Command) -> Result<bool, Error> {
    let (common, which) = match &cmd {
        Command::CheckPotential(c) => (c, 0),
        Command::VerifyIdentities(c) => (c, 1),
        Command::Gap(c) => (c, 2),
        Command::Simulate(c) => (c, 3),
        Command::EstimateGap(c) => (c, 4),
    };
    let ov = Overrides {
        out: common.out.clone(),
        seed: common.seed,
        tol: common.tol,
    };
    let exp = Experiment::load(&common.config, &ov)?;
    Ok(match which {
        0 => {
            let r = experiments::check_potential(&exp)?;
            print(&r);
            r.passed
        }
        1 => {
            let r = experiments::verify_identities(&exp)?;
            print(&r);
            r.passed
        }
        2 => {
            let r = experiments::gap(&exp)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            print(&r);
            r.passed
        }
        3 => {
            print(&experiments::run_simulation(&exp)?);
            true
        }
        _ => {
            print(&experiments::estimate_gap(&exp)?);
            true
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
