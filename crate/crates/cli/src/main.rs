mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use commands::Failure;
use config::{Args, Settings};

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = Settings::resolve(args)
        .map_err(Failure::Usage)
        .and_then(|settings| commands::run(&settings));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("lci-snr: {}", failure.message());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
