use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = breakwave_cli::Cli::parse();
    match breakwave_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
