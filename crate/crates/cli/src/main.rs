mod args;
mod check;
mod commands;
mod config;
mod exit;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use exit::Failure;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG } else { exit::OK });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let ctx = run::Context::from_global(&cli.global)?;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Check(a) => check::run(&ctx, a),
        Command::Christoffel(a) => commands::christoffel(&ctx, a),
        Command::Compare(a) => commands::compare(&ctx, a),
    }
}
