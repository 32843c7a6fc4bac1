use std::process::ExitCode;

use clap::Parser;
use dilation_lab::{render, run, Cli, SEED_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli, std::env::var(SEED_ENV).ok()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = render(&report);
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
