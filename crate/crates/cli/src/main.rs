mod args;
mod commands;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use folded_simplex::Error;

use args::{Cli, Command};

/// Variable capping the number of worker threads.
const THREADS_ENV: &str = "FOLDED_SIMPLEX_THREADS";

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => CliError::Io(m),
            e => CliError::Lib(e),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Lib(e) => match e {
                Error::Parse { .. } => 4,
                Error::InvalidDimension(_)
                | Error::InvalidComposition(_)
                | Error::InvalidParameter(_)
                | Error::AlphaZero(_)
                | Error::OutOfRegion { .. } => 5,
                Error::NotPositiveDefinite(_) | Error::SingularCovariance(_) => 6,
                Error::NumericFailure(_) | Error::SingularFold(_) | Error::FoldFailure { .. } => 7,
                Error::NotConverged(_) | Error::NonConcaveProfile { .. } | Error::BootstrapFailure { .. } => 8,
                Error::Io(_) => 3,
            },
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Contour(a) => commands::contour(&a),
        Command::Outside(a) => commands::outside(&a),
        Command::Test(a) => commands::test(&a),
        Command::Ci(a) => commands::ci(&a),
        Command::Study(a) => commands::study(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
