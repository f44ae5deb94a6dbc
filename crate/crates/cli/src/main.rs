//! `mpreg` command-line front end.

mod args;
mod commands;
mod format;
mod settings;

use clap::Parser;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<mpreg::Error> for CliError {
    fn from(e: mpreg::Error) -> Self {
        let msg = e.to_string();
        match e.class() {
            mpreg::ErrorClass::Usage => CliError::Usage(msg),
            mpreg::ErrorClass::Data => CliError::Data(msg),
            mpreg::ErrorClass::Numerical => CliError::Numerical(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
