//! `mzfid` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage or invalid input,
//! 3 impossible outcome, 4 quadrature did not converge.

mod args;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;
use mzfid::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) => match e {
                Error::ImpossibleOutcome { .. } => 3,
                Error::NotConverged { .. } => 4,
                Error::InvalidPhotonNumber(_)
                | Error::InvalidWidth(_)
                | Error::InvalidPhase(_)
                | Error::InvalidState(_)
                | Error::InvalidPrior(_)
                | Error::OutcomeMismatch { .. }
                | Error::InvalidConfig(_)
                | Error::PriorFile(_)
                | Error::InvalidData(_) => 2,
                _ => 1,
            },
            CliError::Io(_) | CliError::SelfTest(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match run::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
