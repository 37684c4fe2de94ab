//! `spikerec` command line. Machine-readable results go to stdout as one JSON
//! object per line; human-readable tables go to stderr.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O or format error.

mod args;
mod commands;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// A bad flag combination or parameter detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Outcome of a command that ran to completion.
pub enum Status {
    Ok,
    VerificationFailed,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<spikerec::Error>() {
        return match e {
            spikerec::Error::Io { .. }
            | spikerec::Error::Format { .. }
            | spikerec::Error::Length { .. }
            | spikerec::Error::Geometry { .. }
            | spikerec::Error::Image { .. }
            | spikerec::Error::MalformedRecord(_) => 3,
            _ => 2,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    2
}

fn configure_workers(workers: Option<usize>) -> anyhow::Result<usize> {
    match workers {
        Some(0) => Err(usage("--workers must be at least 1")),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| usage(format!("cannot start {n} workers: {e}")))?;
            Ok(n)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(1),
        #[cfg(feature = "parallel")]
        None => Ok(rayon::current_num_threads()),
        #[cfg(not(feature = "parallel"))]
        None => Ok(1),
    }
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let workers = configure_workers(cli.workers)?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(a, &cli.out_dir),
        Command::Reconstruct(a) => commands::reconstruct(a, &cli.out_dir),
        Command::VerifyStability(a) => commands::verify_stability(a),
        Command::Bench(a) => commands::bench(a, workers),
        Command::Compare(a) => commands::compare(a),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on its own usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
