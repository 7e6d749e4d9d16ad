//! `rankone`: build towers, screen eigenvalues, scan rigidity and sample
//! Gauss-Kuzmin statistics from the command line.
//!
//! Exit codes: 0 success, 2 an asserted bound was violated, 3 inconclusive,
//! 1 other errors, 64 usage errors.

mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Failure, EXIT_USAGE};
use config::{depth_cap_from_env, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let cap = match depth_cap_from_env() {
        Ok(c) => c,
        Err(m) => return fail(&Failure::Usage(m)),
    };
    match commands::run(cli.command, cap) {
        Ok(r) => {
            match &r.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &r.body) {
                        return fail(&Failure::Io(format!("cannot write {}: {e}", path.display())));
                    }
                }
                None => print!("{}", r.body),
            }
            ExitCode::from(r.exit as u8)
        }
        Err(f) => fail(&f),
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("error: {f}");
    ExitCode::from(f.exit_code() as u8)
}
