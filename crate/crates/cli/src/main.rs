//! `nodoid`: barriers, solvability checks, grid solves and estimate checks
//! for the prescribed mean curvature equation.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{BarrierArgs, BlowupArgs, NonexistArgs, ProblemArgs};

/// Exit code for malformed invocations and configs.
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Run(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nodoid", version, about = "Nodoid barriers and grid solvers for prescribed mean curvature graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file whose fields override the command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Nodoid barrier profile: CSV, parameter JSON and an SVG plot.
    Barrier {
        #[command(flatten)]
        args: BarrierArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Solvability conditions for a domain and curvature.
    Check {
        #[command(flatten)]
        args: ProblemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Grid solve by continuation in t.
    Solve {
        #[command(flatten)]
        args: ProblemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Solve, then check the height and boundary gradient estimates.
    Verify {
        #[command(flatten)]
        args: ProblemArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Radial shooting sweep over thin annuli.
    Nonexist {
        #[command(flatten)]
        args: NonexistArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Gradient blowup family table.
    Blowup {
        #[command(flatten)]
        args: BlowupArgs,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Barrier { args, common } => {
            let args = config::apply(args, common.config.as_deref())?;
            commands::barrier(&args, &common.out)
        }
        Command::Check { args, common } => {
            let p = config::problem(args, common.config.as_deref())?;
            commands::check(&p, &common.out)
        }
        Command::Solve { args, common } => {
            let p = config::problem(args, common.config.as_deref())?;
            commands::solve(&p, &common.out)
        }
        Command::Verify { args, common } => {
            let p = config::problem(args, common.config.as_deref())?;
            commands::verify(&p, &common.out)
        }
        Command::Nonexist { args, common } => {
            let args = config::apply(args, common.config.as_deref())?;
            commands::nonexist(&args, &common.out)
        }
        Command::Blowup { args, common } => {
            let args = config::apply(args, common.config.as_deref())?;
            commands::blowup(&args, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
