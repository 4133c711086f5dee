// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Data goes to files, diagnostics to stderr.

mod args;
mod commands;
mod config;
mod manifest;

use clap::Parser;

use qconfine::Error;

use args::{Cli, Command};
use commands::Failure;

/// Exit status for each failure class.
pub fn exit_code(f: &Failure) -> i32 {
    match f {
        Failure::Workers(_) => 5,
        Failure::Lib(e) => match e {
            Error::NonHermitianInput { .. } => 3,
            Error::TooShort { .. } => 4,
            Error::Malformed { .. }
            | Error::Io(_)
            | Error::InvalidPlan(_)
            | Error::InvalidDimension(_)
            | Error::UnknownFamily(_)
            | Error::NonUniformSampling { .. }
            | Error::DegenerateTarget(_) => 2,
            _ => 1,
        },
    }
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qconfine: cannot size worker pool: {e}");
            return 2;
        }
    }
    let outcome = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Campaign(c) => commands::campaign(c),
        Command::Decoherence(a) => commands::decoherence(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("qconfine: error: {e}"),
                Failure::Workers(n) => eprintln!("qconfine: {n} worker(s) failed; partial results kept"),
            }
            exit_code(&f)
        }
    }
}
