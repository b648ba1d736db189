//! Command surface for the shock-profile and Evans-function pipeline.
//!
//! Every run resolves a configuration (preset, then config file, then
//! flags, later layers winning), executes one stage of the pipeline and
//! writes CSV data plus a JSON summary into the output directory. All
//! numeric output carries 17 significant digits so runs are comparable
//! bit for bit.

mod config;
mod emit;
mod pool;
mod run;

use clap::Parser;
use std::process::ExitCode;

/// Exit codes: 0 all checks pass, 2 configuration rejected, 3 numerics
/// failed, 4 a stability check evaluated cleanly and came out negative.
fn main() -> ExitCode {
    let cli = config::Cli::parse();
    match run::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
