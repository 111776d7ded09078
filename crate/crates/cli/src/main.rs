use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = aaseq_cli::Cli::parse();
    match aaseq_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(aaseq_cli::exit_code(&e))
        }
    }
}
