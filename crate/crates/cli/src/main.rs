//! spinsim: simulate and cross-validate hidden-variable measurement models
//! for spin-1/2 statistics.
//!
//! Exit codes: 0 = all checks passed, 1 = a statistical or consistency check
//! failed, 2 = usage or configuration error.

mod args;
mod commands;
mod record;

use std::fmt;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files, or model parameters (exit 2).
    Config(String),
    /// A numeric routine failed to meet its accuracy target (exit 1).
    Numeric(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => write!(f, "{m}"),
        }
    }
}

impl From<spinsim_core::Error> for CliError {
    fn from(e: spinsim_core::Error) -> Self {
        match e {
            spinsim_core::Error::Domain(m) | spinsim_core::Error::Config(m) => CliError::Config(m),
            spinsim_core::Error::Numeric(m) => CliError::Numeric(m),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "spinsim",
    version,
    about = "Simulate hidden-variable models of spin-1/2 measurements and check them \
             against the closed-form quantum probabilities",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Elastic-machine experiment: two outcomes with probabilities (1 ± w·u)/2
    Machine(commands::MachineArgs),
    /// Detection-sphere experiment: o1/o2 conditional on detection, a0 otherwise
    Unified(commands::UnifiedArgs),
    /// Detection-sphere experiment on a binary mixture of antipodal states
    Mixed(commands::MixedArgs),
    /// Sweep an angle grid and emit one row of analytics + statistics per point
    Sweep(commands::SweepArgs),
    /// Ensemble counting model: detection/possession fractions and their product law
    Ensemble(commands::EnsembleArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Machine(a) => commands::machine(a).map(|r| (r, a.output.clone())),
        Command::Unified(a) => commands::unified(a).map(|r| (r, a.output.clone())),
        Command::Mixed(a) => commands::mixed(a).map(|r| (r, a.output.clone())),
        Command::Sweep(a) => commands::sweep(a).map(|r| (r, a.output.clone())),
        Command::Ensemble(a) => commands::ensemble(a).map(|r| (r, a.output.clone())),
    };
    let code = match result {
        Ok((rendered, output)) => match rendered.emit(&output) {
            Ok(()) => {
                if rendered.record.passed {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
