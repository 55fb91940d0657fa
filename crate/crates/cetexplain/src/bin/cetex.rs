//! Thin CLI wrapper: parse arguments, configure logging from the
//! `CETEX_LOG` environment variable, and map errors to exit codes
//! (0 success, 1 validation error, 2 numeric failure).

use std::process::ExitCode;

use clap::Parser;

use cetexplain::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CETEX_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
