use std::process::ExitCode;

use clap::Parser;
use zdl::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("zdl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
