//! `bugclass` — train, apply, and evaluate network bug report classifiers.
//!
//! Subcommands: `gen` (synthetic corpus), `inspect` (extraction and feature
//! ranking for one report), `train` (fit and save an ensemble), `predict`
//! (classify a corpus), `evaluate` (split, train every group/model
//! combination plus the ensemble, and report metrics).
//!
//! Exit codes are stable for scripting: 0 success, 1 usage error, 2 data
//! error, 3 I/O error.

mod args;
mod commands;
mod config;
mod errors;
mod table;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use errors::CliError;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => commands::cmd_gen(args),
        Command::Inspect(args) => commands::cmd_inspect(args),
        Command::Train(args) => commands::cmd_train(args),
        Command::Predict(args) => commands::cmd_predict(args),
        Command::Evaluate(args) => commands::cmd_evaluate(args),
    }
}
