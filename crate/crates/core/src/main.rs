use cdma_sigopt::cli::{self, args::CliArgs, CliError};
use clap::Parser;

fn main() {
    let parsed = CliArgs::parse();
    let config = match parsed.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    };
    match cli::run(&config) {
        Ok(()) => {}
        Err(e @ (CliError::Config(_) | CliError::Io(_))) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(3);
        }
    }
}
