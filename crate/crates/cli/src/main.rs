use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use parashoot_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_out = std::env::var_os("PARASHOOT_OUT").filter(|v| !v.is_empty()).map(PathBuf::from);
    match run(&cli.command, env_out) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            for a in &outcome.artifacts {
                println!("  wrote {}", a.display());
            }
            ExitCode::from(outcome.exit.code())
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit.code())
        }
    }
}
