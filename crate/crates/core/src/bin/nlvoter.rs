use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nlvoter::cli::{config_header, execute, resolve, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = match resolve(cli) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    eprint!("{}", config_header(&inv));
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&inv, &mut out) {
        Ok(()) => {
            let _ = out.flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
