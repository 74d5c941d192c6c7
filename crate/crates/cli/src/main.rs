use std::process::ExitCode;

use clap::Parser;
use deptrigger_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cwd = match std::env::current_dir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error[io]: cannot read working directory: {e}");
            return ExitCode::FAILURE;
        }
    };
    match run(cli, std::env::vars(), &cwd) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.category());
            ExitCode::FAILURE
        }
    }
}
