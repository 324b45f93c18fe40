//! `widthlab`: compute width integrals, build width additions and run
//! verification campaigns from the command line.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric failure, 4 an asserted
//! check failed.

mod args;
mod commands;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<widthlab_core::Error> for CliError {
    fn from(e: widthlab_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

/// What a command reports back besides its output.
pub enum Outcome {
    Ok,
    ChecksFailed(usize),
    /// Report written, but some trials stopped on a numeric error.
    TrialErrors(usize),
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be ≥ 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Add(a) => commands::add(a),
        Command::Verify(a) => commands::verify(a),
        Command::Suite(a) => commands::suite(a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed(n)) => {
            eprintln!("widthlab: {n} asserted check(s) failed");
            ExitCode::from(4)
        }
        Ok(Outcome::TrialErrors(n)) => {
            eprintln!("widthlab: {n} trial(s) stopped on a numeric error");
            ExitCode::from(3)
        }
        Err(e) => {
            match &e {
                CliError::Validation(m) => eprintln!("widthlab: invalid input: {m}"),
                CliError::Numeric(m) => eprintln!("widthlab: numeric failure: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
