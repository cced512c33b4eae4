//! `quadfit`: quadratic-distance goodness-of-fit tests from the command line.

mod commands;
mod error;
mod ingest;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors exit 1; exit 2 is reserved for refused routes
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("quadfit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
