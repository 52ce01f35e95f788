use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match haar_orbit::run(haar_orbit::Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
