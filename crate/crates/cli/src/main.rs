//! `subpix`: approximate image matching from the command line.
//!
//! Every command prints one JSON record per line on stdout, each carrying
//! `schema_version`. Diagnostics go to stderr. Exit codes: 0 success,
//! 2 invalid arguments, 3 I/O failure, 4 malformed input, 5 capacity or
//! work-cap exceeded.

mod args;
mod error;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(cli) {
        Ok(lines) => {
            let mut out = std::io::stdout().lock();
            for line in lines {
                if writeln!(out, "{line}").is_err() {
                    return ExitCode::from(3);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("subpix: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
