use std::process::ExitCode;

use clap::Parser;
use hermkr_cli::{render, run, Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(result) => {
            println!("{}", render(&result, cli.format));
            if matches!(cli.command, Command::Selftest(_)) && !result.all_passed() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
