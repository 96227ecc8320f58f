//! Command-line front end of the `hpmetric` binary.

mod args;
mod commands;
mod output;
mod verify;

use clap::Parser;

pub use args::Cli;

/// Parses `std::env::args`, runs the subcommand and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    run(cli)
}

/// Runs an already parsed command line.
pub fn run(cli: Cli) -> i32 {
    let threads = match crate::parallel::configure_threads(cli.threads) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match commands::dispatch(cli.command, threads) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
