use std::process::ExitCode;

use clap::Parser;
use gaussent::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    match execute(&cli.command, echo) {
        Ok(report) => {
            println!("{}", report.render(cli.json).trim_end());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
